#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "bsdlab/distribution.hpp"
#include "bsdlab/errors.hpp"
#include "bsdlab/mollify.hpp"
#include "bsdlab/piecewise.hpp"
#include "bsdlab/random.hpp"
#include "bsdlab/utility.hpp"

namespace bsdlab {

// Snapshot of a constructed utility: derivative values on a uniform grid for
// orders 0..n+1. Tables are produced by the backward trapezoid recursion from
// the top derivative, so integrating table k+1 from b reproduces table k
// exactly and the boundary zeros u^{(k)}(b) = 0, k = 1..n-1, hold by
// construction.
struct IntegratedTable {
  std::vector<double> grid;
  std::vector<std::vector<double>> derivative_tables;  // k = 0..n+1
  int n = 1;
  double boundary_s = 0.0;
  double width = 0.0;  // smoothing width, zero for plain constructions
  std::string base_kind;
};

namespace detail {

class IntegratedTableImpl final : public UtilityImpl {
 public:
  IntegratedTableImpl(std::vector<PiecewisePolynomial> family, int n, double boundary_s,
                      double width, std::string base_kind, int table_resolution)
      : family_(std::move(family)),
        n_(n),
        boundary_s_(boundary_s),
        width_(width),
        base_kind_(std::move(base_kind)),
        table_resolution_(table_resolution) {}

  double deriv(int k, double x) const override {
    const auto& p = family_[static_cast<std::size_t>(k)];
    const double c = std::clamp(x, p.a(), p.b());
    return p(c);
  }
  int max_derivative_order() const override { return n_ + 1; }
  std::string kind() const override { return "integrated_table"; }

  const PiecewisePolynomial& piece(int k) const { return family_[static_cast<std::size_t>(k)]; }

  const IntegratedTable& table() const {
    std::call_once(table_once_, [this] { build_table(); });
    return table_;
  }

 private:
  void build_table() const {
    const Interval iv = family_[0].interval();
    const int res = table_resolution_;
    table_.grid.resize(res);
    const double h = iv.width() / (res - 1);
    for (int i = 0; i < res; ++i) table_.grid[i] = iv.a + h * i;
    table_.grid.back() = iv.b;

    table_.derivative_tables.assign(n_ + 2, std::vector<double>(res));
    auto& top = table_.derivative_tables[n_ + 1];
    const auto& ptop = family_[static_cast<std::size_t>(n_ + 1)];
    for (int i = 0; i < res; ++i) top[i] = ptop(table_.grid[i]);
    const double sign_top = (n_ % 2 == 0) ? 1.0 : -1.0;
    for (int k = n_; k >= 0; --k) {
      auto& tk = table_.derivative_tables[k];
      const auto& up = table_.derivative_tables[k + 1];
      tk[res - 1] = (k == n_) ? -sign_top * boundary_s_ : 0.0;  // pinned boundary data
      for (int i = res - 2; i >= 0; --i) {
        const double step = table_.grid[i + 1] - table_.grid[i];
        tk[i] = tk[i + 1] - 0.5 * step * (up[i] + up[i + 1]);
      }
    }
    table_.n = n_;
    table_.boundary_s = boundary_s_;
    table_.width = width_;
    table_.base_kind = base_kind_;
  }

  std::vector<PiecewisePolynomial> family_;
  int n_;
  double boundary_s_;
  double width_;
  std::string base_kind_;
  int table_resolution_;
  mutable std::once_flag table_once_;
  mutable IntegratedTable table_;
};

// Shared construction: set u^{(n+1)} to the piecewise-linear interpolant of
// (-1)^n w on the given breakpoints, pin u^{(n)}(b) = (-1)^{n+1} s, then
// integrate downward with u^{(k)}(b) = 0 for k = n-1..1 and u(b) = 0. Sign
// propagation through the backward integrals makes every output a genuine
// member of the generator class: the integrand keeps one sign on each level,
// so (-1)^k u^{(k)} <= 0 holds everywhere, not just at grid points.
inline UtilitySpec integrate_generator_chain(int n, std::vector<double> breakpoints,
                                             const std::vector<double>& base_values,
                                             double boundary_s, double width,
                                             std::string base_kind, int table_resolution) {
  const double sign_top = (n % 2 == 0) ? 1.0 : -1.0;  // (-1)^n
  PiecewisePolynomial p;
  p.breakpoints = std::move(breakpoints);
  p.pieces.resize(p.breakpoints.size() - 1);
  for (std::size_t i = 0; i + 1 < p.breakpoints.size(); ++i) {
    const double h = p.breakpoints[i + 1] - p.breakpoints[i];
    const double v0 = sign_top * base_values[i];
    const double v1 = sign_top * base_values[i + 1];
    p.pieces[i] = {v0, (v1 - v0) / h};
  }

  std::vector<PiecewisePolynomial> family(n + 2);
  family[static_cast<std::size_t>(n + 1)] = p;
  for (int k = n; k >= 0; --k) {
    const double bv = (k == n) ? -sign_top * boundary_s : 0.0;  // (-1)^{n+1} s at level n
    family[static_cast<std::size_t>(k)] =
        antiderivative_from_right(family[static_cast<std::size_t>(k + 1)], bv);
  }
  const Interval iv = family[0].interval();
  auto impl = std::make_shared<IntegratedTableImpl>(std::move(family), n, boundary_s, width,
                                                    std::move(base_kind), table_resolution);
  return {std::move(impl), iv};
}

}  // namespace detail

inline const IntegratedTable& integrated_table(const UtilitySpec& u) {
  const auto* impl = dynamic_cast<const detail::IntegratedTableImpl*>(u.impl());
  if (!impl) raise(Errc::bad_order, "utility is not an integrated-table construction");
  return impl->table();
}

// Constructs a generator-class member from a nonnegative base profile w (the
// top derivative magnitude) and a boundary slope weight s >= 0.
inline UtilitySpec sample_generator_utility(int n, Interval interval,
                                            const std::function<double(double)>& base_w,
                                            double boundary_s, int grid_resolution = 257) {
  interval.validate();
  if (n < 1) raise(Errc::bad_order, "generator order must be positive");
  if (grid_resolution < 2) raise(Errc::bad_order, "grid resolution must be at least 2");
  if (boundary_s < 0.0) raise(Errc::negative_base, "boundary weight must be nonnegative");

  std::vector<double> xs(grid_resolution), ws(grid_resolution);
  const double h = interval.width() / (grid_resolution - 1);
  for (int i = 0; i < grid_resolution; ++i) {
    xs[i] = interval.a + h * i;
    if (i + 1 == grid_resolution) xs[i] = interval.b;
    ws[i] = base_w(xs[i]);
    if (ws[i] < 0.0)
      raise(Errc::negative_base, "base profile negative at x=" + std::to_string(xs[i]));
  }
  return detail::integrate_generator_chain(n, std::move(xs), ws, boundary_s, 0.0, "sampled_base",
                                           2049);
}

// Smooth surrogate for the kinked utility -max{c-x,0}^n: mollifying the
// (n-1)-th derivative profile of the kink and running the backward
// integration recursion is the same as integrating the smoothed second
// derivative profile n! k_w(x - c) with boundary slope n! (1 - K_w(b - c)).
// The output is therefore a generator member whose expected utility converges
// to minus the lower partial moment as the width shrinks.
inline UtilitySpec build_kink_approximant(double c, int n, Interval interval, double width,
                                            int kernel_nodes = 0) {
  interval.validate();
  if (n < 1) raise(Errc::bad_order, "order must be positive");
  if (!(width > 0.0)) raise(Errc::bad_order, "width must be positive");
  if (!interval.contains(c, 1e-12 * interval.width()))
    raise(Errc::out_of_interval, "threshold outside the interval");

  double factorial = 1.0;
  for (int j = 2; j <= n; ++j) factorial *= j;

  const double eps = 1e-12 * interval.width();
  if (c <= interval.a + eps) {
    // Kink outside the active region: the zero utility.
    return detail::integrate_generator_chain(
        n, {interval.a, interval.b}, {0.0, 0.0}, 0.0, width, "zero_base", 1025);
  }

  if (kernel_nodes <= 0)
    kernel_nodes = static_cast<int>(std::ceil(48.0 * std::sqrt(interval.width() / width)));
  kernel_nodes = std::clamp(kernel_nodes, 48, 1 << 17);

  const double lo = std::fmax(interval.a, c - width);
  const double hi = std::fmin(interval.b, c + width);
  std::vector<double> xs;
  xs.push_back(interval.a);
  if (lo > interval.a + eps) xs.push_back(lo);
  const double dh = (hi - lo) / (2 * kernel_nodes);
  for (int j = 1; j < 2 * kernel_nodes; ++j) {
    const double x = lo + dh * j;
    if (x > xs.back() + eps && x < interval.b - eps) xs.push_back(x);
  }
  if (hi < interval.b - eps && hi > xs.back() + eps) xs.push_back(hi);
  xs.push_back(interval.b);

  std::vector<double> ws(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    ws[i] = factorial * bump_kernel((xs[i] - c) / width) / width;
  const double boundary_s =
      factorial * (1.0 - detail::bump_kernel_cdf((interval.b - c) / width));

  return detail::integrate_generator_chain(n, std::move(xs), ws, boundary_s, width,
                                           "smoothed_kink", 2049);
}

// W_{j+1}(c) = (1/j!) sum_{x_i < c} p_i (c - x_i)^j, the j-fold iterated
// integral of the CDF.
inline double iterated_integral(const DiscreteDistribution& W, int j, double c) {
  if (j < 1) raise(Errc::bad_order, "iterated integral order must be positive");
  double factorial = 1.0;
  for (int i = 2; i <= j; ++i) factorial *= i;
  return lpm_value(W, j, c) / factorial;
}

// Nonnegative trigonometric/polynomial mixture with a handful of bumps; used
// as the random base profile for generator sampling.
inline std::function<double(double)> random_base_profile(Rng& rng, Interval iv) {
  struct Term {
    double amp, freq, phase;
  };
  const int bumps = rng.uniform_int(1, 5);
  std::vector<Term> terms(bumps);
  for (auto& t : terms) t = {rng.uniform(0.1, 1.0), rng.uniform(0.5, 3.5), rng.uniform(0.0, 3.14)};
  const double c0 = rng.coin(0.3) ? 0.0 : rng.uniform(0.0, 0.5);
  const double overall = rng.uniform(0.2, 3.0);
  const double poly_amp = rng.coin() ? rng.uniform(0.0, 1.0) : 0.0;
  const int poly_deg = rng.uniform_int(1, 3);
  const double a = iv.a, w = iv.width();
  return [=](double x) {
    const double t = (x - a) / w;
    double v = c0 + poly_amp * std::pow(t, poly_deg);
    for (const auto& term : terms) {
      const double s = std::sin(3.141592653589793 * (term.freq * t + term.phase));
      v += term.amp * s * s;
    }
    return overall * v;
  };
}

inline UtilitySpec random_generator_sample(Rng& rng, int n, Interval iv,
                                           int grid_resolution = 129) {
  const bool flat = rng.coin(0.15);
  const double s = rng.coin(0.3) ? 0.0 : rng.uniform(0.0, 2.0);
  if (flat) {
    const double level = rng.uniform(0.0, 2.0);
    return sample_generator_utility(
        n, iv, [level](double) { return level; }, s, grid_resolution);
  }
  auto base = random_base_profile(rng, iv);
  return sample_generator_utility(n, iv, base, s, grid_resolution);
}

}  // namespace bsdlab
