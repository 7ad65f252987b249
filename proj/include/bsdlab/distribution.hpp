#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "bsdlab/errors.hpp"
#include "bsdlab/interval.hpp"

namespace bsdlab {

// Finitely supported distribution on a bounded interval. Atoms are strictly
// increasing, probabilities strictly positive and summing to one; values are
// immutable after construction.
class DiscreteDistribution {
 public:
  DiscreteDistribution(std::vector<double> atoms, std::vector<double> probs, Interval support)
      : atoms_(std::move(atoms)), probs_(std::move(probs)), support_(support) {}

  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& probs() const { return probs_; }
  const Interval& support_interval() const { return support_; }
  std::size_t size() const { return atoms_.size(); }

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) m += atoms_[i] * probs_[i];
    return m;
  }

  // CDF, right-continuous.
  double cdf(double c) const {
    double s = 0.0;
    for (std::size_t i = 0; i < atoms_.size() && atoms_[i] <= c; ++i) s += probs_[i];
    return s;
  }

  void validate() const {
    support_.validate();
    if (atoms_.empty()) raise(Errc::empty_support, "distribution has no atoms");
    if (atoms_.size() != probs_.size())
      raise(Errc::bad_weights, "atoms and probabilities differ in length");
    double sum = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (!(probs_[i] > 0.0)) raise(Errc::bad_weights, "probabilities must be positive");
      if (!support_.contains(atoms_[i]))
        raise(Errc::out_of_interval, "atom outside the support interval");
      if (i + 1 < atoms_.size() && !(atoms_[i] < atoms_[i + 1]))
        raise(Errc::out_of_interval, "atoms must be strictly increasing");
      sum += probs_[i];
    }
    if (std::fabs(sum - 1.0) > 1e-12) raise(Errc::bad_weights, "probabilities must sum to one");
  }

 private:
  std::vector<double> atoms_;
  std::vector<double> probs_;
  Interval support_;
};

// Direct-summation lower partial moment  LPM_{n,c} = sum p_i * max(c - x_i, 0)^n.
// Exponent 0 uses the right-continuous convention 1{x <= c}.
inline double lpm_value(const DiscreteDistribution& dist, int exponent, double c) {
  if (exponent < 0) raise(Errc::bad_order, "lpm exponent must be nonnegative");
  if (exponent == 0) return dist.cdf(c);
  double s = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double d = c - dist.atoms()[i];
    if (d > 0.0) s += dist.probs()[i] * std::pow(d, exponent);
  }
  return s;
}

// Builds a distribution from raw data: drops zero-probability atoms, sorts,
// merges atoms closer than 1e-12*(b-a), and validates the weight sum (exact
// renormalization afterwards keeps the stored probabilities summing to one).
inline DiscreteDistribution make_distribution(std::vector<double> atoms, std::vector<double> probs,
                                              Interval interval, bool normalize = false) {
  interval.validate();
  if (atoms.empty() || atoms.size() != probs.size())
    raise(Errc::bad_weights, "need equally sized, nonempty atom and probability sequences");

  double sum = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(atoms[i]) || !std::isfinite(probs[i]))
      raise(Errc::bad_weights, "atoms and probabilities must be finite");
    if (probs[i] < 0.0) raise(Errc::bad_weights, "probabilities must be nonnegative");
    sum += probs[i];
  }
  if (sum <= 0.0) raise(Errc::empty_support, "all probabilities are zero");
  if (!normalize && std::fabs(sum - 1.0) > 1e-9)
    raise(Errc::bad_weights, "probabilities sum to " + std::to_string(sum) +
                                 "; pass normalize to rescale");

  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return atoms[i] < atoms[j]; });

  const double merge_tol = 1e-12 * interval.width();
  std::vector<double> xs, ps;
  xs.reserve(atoms.size());
  ps.reserve(atoms.size());
  for (std::size_t idx : order) {
    if (probs[idx] == 0.0) continue;
    if (!interval.contains(atoms[idx]))
      raise(Errc::out_of_interval, "atom " + std::to_string(atoms[idx]) + " outside [a,b]");
    if (!xs.empty() && atoms[idx] - xs.back() <= merge_tol) {
      ps.back() += probs[idx];
    } else {
      xs.push_back(atoms[idx]);
      ps.push_back(probs[idx]);
    }
  }
  if (xs.empty()) raise(Errc::empty_support, "all probabilities are zero");
  for (double& p : ps) p /= sum;

  DiscreteDistribution dist(std::move(xs), std::move(ps), interval);
  dist.validate();
  return dist;
}

inline DiscreteDistribution point_mass(double x, Interval interval) {
  return make_distribution({x}, {1.0}, interval);
}

// The two-outcome lottery family: G pays a with probability theta^n and b
// otherwise, F pays the sure amount theta*a + (1-theta)*b.
inline std::pair<DiscreteDistribution, DiscreteDistribution> theta_lottery(double theta, int n,
                                                                           Interval interval) {
  interval.validate();
  if (!(theta > 0.0 && theta < 1.0)) raise(Errc::bad_order, "theta must lie in (0,1)");
  if (n < 1) raise(Errc::bad_order, "lottery order must be a positive integer");
  const double pn = std::pow(theta, n);
  DiscreteDistribution g = make_distribution({interval.a, interval.b}, {pn, 1.0 - pn}, interval);
  DiscreteDistribution f = point_mass(theta * interval.a + (1.0 - theta) * interval.b, interval);
  return {std::move(f), std::move(g)};
}

}  // namespace bsdlab
