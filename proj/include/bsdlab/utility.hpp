#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bsdlab/errors.hpp"
#include "bsdlab/interval.hpp"
#include "bsdlab/piecewise.hpp"

namespace bsdlab {
namespace detail {

class UtilityImpl {
 public:
  virtual ~UtilityImpl() = default;
  virtual double deriv(int k, double x) const = 0;
  virtual int max_derivative_order() const = 0;
  virtual std::string kind() const = 0;
};

// k-th derivative of (b - x)^m.
inline double falling_power_term(int m, double b, double x, int k) {
  if (k > m) return 0.0;
  double coef = 1.0;
  for (int j = 0; j < k; ++j) coef *= static_cast<double>(m - j);
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return sign * coef * std::pow(b - x, m - k);
}

}  // namespace detail

// A utility function with evaluable derivatives; endpoint derivatives are the
// one-sided limits. Evaluation is pure and shareable across threads.
class UtilitySpec {
 public:
  UtilitySpec() = default;
  UtilitySpec(std::shared_ptr<const detail::UtilityImpl> impl, Interval iv)
      : impl_(std::move(impl)), interval_(iv) {
    interval_.validate();
  }

  double deriv(int k, double x) const {
    if (k < 0 || k > impl_->max_derivative_order())
      raise(Errc::derivative_order_unavailable,
            kind() + " provides derivatives up to order " +
                std::to_string(impl_->max_derivative_order()));
    const double v = impl_->deriv(k, x);
    if (!std::isfinite(v))
      raise(Errc::evaluation_domain,
            kind() + " undefined at x=" + std::to_string(x) + " (order " + std::to_string(k) + ")");
    return v;
  }

  double operator()(double x) const { return deriv(0, x); }
  int max_derivative_order() const { return impl_->max_derivative_order(); }
  const Interval& interval() const { return interval_; }
  std::string kind() const { return impl_->kind(); }
  const detail::UtilityImpl* impl() const { return impl_.get(); }

 private:
  std::shared_ptr<const detail::UtilityImpl> impl_;
  Interval interval_;
};

namespace detail {

class PowerCrraVariant final : public UtilityImpl {
 public:
  PowerCrraVariant(double gamma, double b) : gamma_(gamma), b_(b) {
    if (!(gamma > 0.0)) raise(Errc::bad_order, "power_crra_variant needs gamma > 0");
    if (!(b > 0.0)) raise(Errc::bad_order, "power_crra_variant needs b > 0");
  }

  double deriv(int k, double x) const override {
    const bool log_case = std::fabs(gamma_ - 1.0) <= 1e-12;
    if (k == 0) {
      if (log_case) return std::log(x) - x / b_;
      return std::pow(x, 1.0 - gamma_) / (1.0 - gamma_) - x * std::pow(b_, -gamma_);
    }
    if (k == 1) {
      if (log_case) return 1.0 / x - 1.0 / b_;
      return std::pow(x, -gamma_) - std::pow(b_, -gamma_);
    }
    // k >= 2: derivative of x^{-gamma} taken k-1 times.
    double coef = 1.0;
    for (int j = 0; j <= k - 2; ++j) coef *= -(gamma_ + j);
    return coef * std::pow(x, -gamma_ - (k - 1));
  }

  int max_derivative_order() const override { return 64; }
  std::string kind() const override { return "power_crra_variant"; }

 private:
  double gamma_, b_;
};

class NegPower final : public UtilityImpl {
 public:
  NegPower(int n, double b) : n_(n), b_(b) {
    if (n < 1) raise(Errc::bad_order, "neg_power needs n >= 1");
  }

  double deriv(int k, double x) const override { return -falling_power_term(n_, b_, x, k); }
  int max_derivative_order() const override { return 64; }
  std::string kind() const override { return "neg_power"; }

 private:
  int n_;
  double b_;
};

// g(x) = -(b-x)^{n+1} (1 - gamma (b-x)) = -(b-x)^{n+1} + gamma (b-x)^{n+2}
class ApOnlyWitness final : public UtilityImpl {
 public:
  ApOnlyWitness(int n, double b, double gamma) : n_(n), b_(b), gamma_(gamma) {
    if (n < 2) raise(Errc::bad_order, "ap_only_witness needs n >= 2");
  }

  double deriv(int k, double x) const override {
    return -falling_power_term(n_ + 1, b_, x, k) + gamma_ * falling_power_term(n_ + 2, b_, x, k);
  }
  int max_derivative_order() const override { return 64; }
  std::string kind() const override { return "ap_only_witness"; }
  double gamma() const { return gamma_; }

 private:
  int n_;
  double b_, gamma_;
};

// u(x) = -max{c-x, 0}^n, continuous derivatives only up to order n-1.
class LpmKink final : public UtilityImpl {
 public:
  LpmKink(int n, double c) : n_(n), c_(c) {
    if (n < 1) raise(Errc::bad_order, "lpm_kink needs n >= 1");
  }

  double deriv(int k, double x) const override {
    if (x >= c_) return 0.0;
    double coef = 1.0;
    for (int j = 0; j < k; ++j) coef *= static_cast<double>(n_ - j);
    const double sign = (k % 2 == 0) ? -1.0 : 1.0;
    return sign * coef * std::pow(c_ - x, n_ - k);
  }
  int max_derivative_order() const override { return n_ - 1; }
  std::string kind() const override { return "lpm_kink"; }

 private:
  int n_;
  double c_;
};

class AffineUtility final : public UtilityImpl {
 public:
  AffineUtility(double alpha, double beta) : alpha_(alpha), beta_(beta) {}
  double deriv(int k, double x) const override {
    if (k == 0) return alpha_ + beta_ * x;
    if (k == 1) return beta_;
    return 0.0;
  }
  int max_derivative_order() const override { return 64; }
  std::string kind() const override { return "affine"; }

 private:
  double alpha_, beta_;
};

class ConstantUtility final : public UtilityImpl {
 public:
  explicit ConstantUtility(double kappa) : kappa_(kappa) {}
  double deriv(int k, double) const override { return k == 0 ? kappa_ : 0.0; }
  int max_derivative_order() const override { return 64; }
  std::string kind() const override { return "constant"; }

 private:
  double kappa_;
};

class LinearCombinationUtility final : public UtilityImpl {
 public:
  LinearCombinationUtility(std::vector<std::pair<double, UtilitySpec>> terms, double constant)
      : terms_(std::move(terms)), constant_(constant) {
    max_order_ = 64;
    for (const auto& [w, u] : terms_) max_order_ = std::min(max_order_, u.max_derivative_order());
  }

  double deriv(int k, double x) const override {
    double v = (k == 0) ? constant_ : 0.0;
    for (const auto& [w, u] : terms_) v += w * u.deriv(k, x);
    return v;
  }
  int max_derivative_order() const override { return max_order_; }
  std::string kind() const override { return "linear_combination"; }

 private:
  std::vector<std::pair<double, UtilitySpec>> terms_;
  double constant_;
  int max_order_;
};

// Utility represented exactly as a piecewise polynomial together with its
// derivative family; evaluation clamps to [a,b] (one-sided endpoint limits).
class PiecewisePolyUtility final : public UtilityImpl {
 public:
  PiecewisePolyUtility(PiecewisePolynomial u, int max_order, std::string kind)
      : kind_(std::move(kind)), max_order_(max_order) {
    family_.reserve(max_order + 1);
    family_.push_back(std::move(u));
    for (int k = 1; k <= max_order; ++k) family_.push_back(derivative(family_.back()));
  }

  double deriv(int k, double x) const override {
    const auto& p = family_[static_cast<std::size_t>(k)];
    const double c = std::clamp(x, p.a(), p.b());
    return p(c);
  }
  int max_derivative_order() const override { return max_order_; }
  std::string kind() const override { return kind_; }
  const PiecewisePolynomial& piece(int k) const { return family_[static_cast<std::size_t>(k)]; }

 private:
  std::string kind_;
  int max_order_;
  std::vector<PiecewisePolynomial> family_;
};

}  // namespace detail

inline UtilitySpec power_crra_variant(double gamma, double b, Interval iv) {
  return {std::make_shared<detail::PowerCrraVariant>(gamma, b), iv};
}

inline UtilitySpec neg_power(int n, double b, Interval iv) {
  return {std::make_shared<detail::NegPower>(n, b), iv};
}

inline UtilitySpec ap_only_witness_utility(int n, double b, double gamma, Interval iv) {
  return {std::make_shared<detail::ApOnlyWitness>(n, b, gamma), iv};
}

inline UtilitySpec lpm_kink(int n, double c, Interval iv) {
  return {std::make_shared<detail::LpmKink>(n, c), iv};
}

inline UtilitySpec affine_utility(double alpha, double beta, Interval iv) {
  return {std::make_shared<detail::AffineUtility>(alpha, beta), iv};
}

inline UtilitySpec constant_utility(double kappa, Interval iv) {
  return {std::make_shared<detail::ConstantUtility>(kappa), iv};
}

inline UtilitySpec linear_combination(std::vector<std::pair<double, UtilitySpec>> terms,
                                      double constant, Interval iv) {
  return {std::make_shared<detail::LinearCombinationUtility>(std::move(terms), constant), iv};
}

inline UtilitySpec piecewise_polynomial_utility(PiecewisePolynomial u, int max_order,
                                                std::string kind) {
  const Interval iv = u.interval();
  return {std::make_shared<detail::PiecewisePolyUtility>(std::move(u), max_order, std::move(kind)),
          iv};
}

}  // namespace bsdlab
