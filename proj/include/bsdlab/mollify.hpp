#pragma once

#include <cmath>
#include <vector>

#include "bsdlab/errors.hpp"
#include "bsdlab/interval.hpp"

namespace bsdlab {

// Uniformly sampled function values on [a,b].
struct FunctionTable {
  std::vector<double> xs;
  std::vector<double> values;

  double step() const { return xs[1] - xs[0]; }

  double interpolate(double x) const {
    const double h = step();
    if (x <= xs.front()) {
      const double slope = (values[1] - values[0]) / h;
      return values[0] + slope * (x - xs.front());
    }
    if (x >= xs.back()) {
      const std::size_t m = values.size();
      const double slope = (values[m - 1] - values[m - 2]) / h;
      return values[m - 1] + slope * (x - xs.back());
    }
    const auto idx = static_cast<std::size_t>((x - xs.front()) / h);
    const std::size_t i = std::min(idx, xs.size() - 2);
    const double t = (x - xs[i]) / h;
    return values[i] * (1.0 - t) + values[i + 1] * t;
  }
};

inline FunctionTable tabulate(const Interval& iv, int resolution, const auto& f) {
  if (resolution < 3) raise(Errc::bad_order, "table needs at least 3 points");
  FunctionTable t;
  t.xs.resize(resolution);
  t.values.resize(resolution);
  const double h = iv.width() / (resolution - 1);
  for (int i = 0; i < resolution; ++i) {
    t.xs[i] = iv.a + h * i;
    t.values[i] = f(t.xs[i]);
  }
  t.xs.back() = iv.b;
  return t;
}

// The standard compactly supported bump exp(-1/(1-t^2)) on [-1,1], normalized
// to integrate to one.
inline double bump_kernel(double t) {
  if (std::fabs(t) >= 1.0) return 0.0;
  constexpr double norm = 0.4439938161680786;  // integral of exp(-1/(1-t^2)) on [-1,1]
  return std::exp(-1.0 / (1.0 - t * t)) / norm;
}

namespace detail {

// CDF of the unit bump kernel, tabulated once with per-interval Simpson.
inline double bump_kernel_cdf(double t) {
  constexpr int kCdfPoints = 8192;
  static const std::vector<double> table = [] {
    std::vector<double> cdf(kCdfPoints + 1, 0.0);
    const double h = 2.0 / kCdfPoints;
    for (int i = 0; i < kCdfPoints; ++i) {
      const double x0 = -1.0 + h * i;
      cdf[i + 1] = cdf[i] + h / 6.0 * (bump_kernel(x0) + 4.0 * bump_kernel(x0 + h / 2.0) +
                                       bump_kernel(x0 + h));
    }
    const double total = cdf[kCdfPoints];
    for (double& v : cdf) v = std::fmin(1.0, std::fmax(0.0, v / total));
    return cdf;
  }();
  if (t <= -1.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double pos = (t + 1.0) / 2.0 * kCdfPoints;
  const auto i = static_cast<std::size_t>(pos);
  if (i >= static_cast<std::size_t>(kCdfPoints)) return 1.0;
  const double frac = pos - static_cast<double>(i);
  return table[i] * (1.0 - frac) + table[i + 1] * frac;
}

inline void require_convex_decreasing(const FunctionTable& f) {
  double scale = 0.0;
  for (double v : f.values) scale = std::fmax(scale, std::fabs(v));
  const double tol = 1e-9 * std::fmax(1.0, scale);
  for (std::size_t i = 0; i + 1 < f.values.size(); ++i)
    if (f.values[i + 1] - f.values[i] > tol)
      raise(Errc::not_decreasing, "mollify input must be decreasing");
  for (std::size_t i = 1; i + 1 < f.values.size(); ++i)
    if (f.values[i - 1] - 2.0 * f.values[i] + f.values[i + 1] < -tol)
      raise(Errc::not_convex, "mollify input must be convex");
}

}  // namespace detail

struct MollifierConfig {
  double width = 0.05;
  int grid_resolution = 0;  // output resolution; 0 keeps the input grid
};

// Convolution with the width-scaled bump. The input is extended affinely on
// both sides (left slope f'(a), right slope f'(b)), which preserves convexity
// and monotonicity and reproduces affine inputs exactly; the output therefore
// stays convex and decreasing and lies within Lipschitz(f)*width of f.
inline FunctionTable mollify(const FunctionTable& f, const MollifierConfig& config) {
  if (!(config.width > 0.0)) raise(Errc::bad_order, "mollifier width must be positive");
  if (f.xs.size() < 3 || f.xs.size() != f.values.size())
    raise(Errc::bad_order, "mollify needs a table of at least 3 points");
  detail::require_convex_decreasing(f);

  const int out_res =
      config.grid_resolution > 0 ? config.grid_resolution : static_cast<int>(f.xs.size());
  FunctionTable out;
  out.xs.resize(out_res);
  out.values.assign(out_res, 0.0);
  const double a = f.xs.front(), b = f.xs.back();
  const double h_out = (b - a) / (out_res - 1);

  const double dy = std::fmin(h_out / 8.0, config.width / 16.0);
  const int half = static_cast<int>(std::ceil(config.width / dy));
  std::vector<double> weights(2 * half + 1);
  double wsum = 0.0;
  for (int j = -half; j <= half; ++j) {
    weights[j + half] = bump_kernel(j * dy / config.width);
    wsum += weights[j + half];
  }
  for (double& w : weights) w /= wsum;

  for (int i = 0; i < out_res; ++i) {
    const double x = (i + 1 == out_res) ? b : a + h_out * i;
    out.xs[i] = x;
    double acc = 0.0;
    for (int j = -half; j <= half; ++j) acc += weights[j + half] * f.interpolate(x - j * dy);
    out.values[i] = acc;
  }
  return out;
}

}  // namespace bsdlab
