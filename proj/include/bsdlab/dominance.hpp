#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "bsdlab/distribution.hpp"
#include "bsdlab/errors.hpp"
#include "bsdlab/piecewise.hpp"
#include "bsdlab/utility.hpp"

namespace bsdlab {

// The three LPM-based orders. Every function below names the exponent of
// max{c-x,0} explicitly; the classical degree labels appear only in reports
// (n-th degree dominance uses exponent n-1, n-th degree bounded dominance
// uses exponent n).
enum class DominanceOrder { bsd, sd, lpm_at };

inline const char* order_name(DominanceOrder o) {
  switch (o) {
    case DominanceOrder::bsd: return "bsd";
    case DominanceOrder::sd: return "sd";
    case DominanceOrder::lpm_at: return "lpm_at";
  }
  return "?";
}

inline int paper_degree(DominanceOrder o, int exponent) {
  return o == DominanceOrder::bsd ? exponent : exponent + 1;
}

struct DominanceVerdict {
  DominanceOrder order = DominanceOrder::bsd;
  int exponent = 1;
  Interval interval;
  bool holds = true;
  double min_margin = 0.0;           // min over thresholds of LPM(F) - LPM(G)
  std::optional<double> witness_c;   // a threshold violating the inequality
  std::optional<double> threshold;   // the single c for the lpm_at order
  SignCertificate certificate;
};

namespace detail {

inline void require_same_support(const DiscreteDistribution& F, const DiscreteDistribution& G) {
  if (!same_interval(F.support_interval(), G.support_interval()))
    raise(Errc::interval_mismatch, "F and G must share the support interval");
}

}  // namespace detail

// F dominates G in the bounded order iff LPM_{n,c}(F) >= LPM_{n,c}(G) for all
// c in [a,b]; ties within tolerance count as holding.
inline DominanceVerdict check_bsd(const DiscreteDistribution& F, const DiscreteDistribution& G,
                                  int exponent, const Interval& interval, double tolerance = -1.0) {
  detail::require_same_support(F, G);
  if (!same_interval(F.support_interval(), interval))
    raise(Errc::interval_mismatch, "distributions are not supported on the given interval");
  const PiecewisePolynomial diff = subtract(lpm_curve(F, exponent), lpm_curve(G, exponent));
  const double tol = tolerance >= 0.0 ? tolerance : default_sign_tolerance(diff);
  const SignCertificate cert = certify_nonnegative(diff, tol);

  DominanceVerdict v;
  v.order = DominanceOrder::bsd;
  v.exponent = exponent;
  v.interval = interval;
  v.holds = cert.nonnegative();
  v.min_margin = cert.min_value;
  v.witness_c = cert.witness;
  v.certificate = cert;
  return v;
}

// Unbounded order: the same inequality at every real threshold. Below a the
// difference vanishes identically; beyond b a single polynomial decides.
inline DominanceVerdict check_sd(const DiscreteDistribution& F, const DiscreteDistribution& G,
                                 int exponent, double tolerance = -1.0) {
  detail::require_same_support(F, G);
  const Interval iv = F.support_interval();
  const PiecewisePolynomial diff = subtract(lpm_curve(F, exponent), lpm_curve(G, exponent));
  const double tol = tolerance >= 0.0 ? tolerance : default_sign_tolerance(diff);
  const SignCertificate inner = certify_nonnegative(diff, tol);
  const SignCertificate tail = tail_nonnegative(F, G, exponent, tol);

  DominanceVerdict v;
  v.order = DominanceOrder::sd;
  v.exponent = exponent;
  v.interval = iv;
  v.holds = inner.nonnegative() && tail.nonnegative();
  v.min_margin = std::fmin(inner.min_value, tail.min_value);
  v.certificate = inner.min_value <= tail.min_value ? inner : tail;
  if (!inner.nonnegative())
    v.witness_c = inner.witness;
  else if (!tail.nonnegative())
    v.witness_c = tail.witness;
  return v;
}

// Single-threshold LPM risk-measure order.
inline DominanceVerdict check_lpm_at(const DiscreteDistribution& F, const DiscreteDistribution& G,
                                     int exponent, double c, double tolerance = -1.0) {
  detail::require_same_support(F, G);
  const double margin = lpm_value(F, exponent, c) - lpm_value(G, exponent, c);
  const double scale =
      std::fmax(1.0, std::fabs(lpm_value(F, exponent, c)) + std::fabs(lpm_value(G, exponent, c)));
  const double tol = tolerance >= 0.0 ? tolerance : 1e-9 * scale;

  DominanceVerdict v;
  v.order = DominanceOrder::lpm_at;
  v.exponent = exponent;
  v.interval = F.support_interval();
  v.threshold = c;
  v.min_margin = margin;
  v.holds = margin >= -tol;
  if (!v.holds) v.witness_c = c;
  v.certificate.min_value = margin;
  v.certificate.argmin = c;
  v.certificate.tolerance = tol;
  if (!v.holds) {
    v.certificate.verdict = SignCertificate::Verdict::violated_at;
    v.certificate.witness = c;
  }
  return v;
}

// integral of u dG minus integral of u dF; positive means the decision maker
// prefers G.
inline double expected_utility_gap(const DiscreteDistribution& F, const DiscreteDistribution& G,
                                   const UtilitySpec& u) {
  double eg = 0.0, ef = 0.0;
  for (std::size_t i = 0; i < G.size(); ++i) eg += G.probs()[i] * u(G.atoms()[i]);
  for (std::size_t i = 0; i < F.size(); ++i) ef += F.probs()[i] * u(F.atoms()[i]);
  return eg - ef;
}

}  // namespace bsdlab
