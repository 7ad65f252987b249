#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bsdlab/distribution.hpp"
#include "bsdlab/errors.hpp"
#include "bsdlab/interval.hpp"

namespace bsdlab {
namespace detail {

inline double poly_eval(std::span<const double> coeffs, double s) {
  double v = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) v = v * s + coeffs[i];
  return v;
}

inline std::vector<double> poly_derivative(std::span<const double> coeffs) {
  if (coeffs.size() <= 1) return {0.0};
  std::vector<double> out(coeffs.size() - 1);
  for (std::size_t k = 1; k < coeffs.size(); ++k) out[k - 1] = coeffs[k] * static_cast<double>(k);
  return out;
}

// Re-center coefficients from expansion point t to t + delta.
inline std::vector<double> poly_shift(std::span<const double> coeffs, double delta) {
  std::vector<double> out(coeffs.begin(), coeffs.end());
  // Horner-style Taylor shift: repeated synthetic division by (s - delta).
  const std::size_t n = out.size();
  for (std::size_t j = 0; j + 1 < n; ++j)
    for (std::size_t k = n - 1; k > j; --k) out[k - 1] += delta * out[k];
  return out;
}

inline std::size_t poly_effective_degree(std::span<const double> coeffs, double rel_tol = 1e-14) {
  double scale = 0.0;
  for (double c : coeffs) scale = std::fmax(scale, std::fabs(c));
  if (scale == 0.0) return 0;
  std::size_t d = coeffs.size() - 1;
  while (d > 0 && std::fabs(coeffs[d]) <= rel_tol * scale) --d;
  return d;
}

// All sign-change roots of the polynomial on [lo, hi], found by recursively
// splitting at the derivative's roots and bisecting each monotone piece to
// 1e-13 relative width. Even-multiplicity touch points are not reported; the
// extremum enumeration below does not need them.
inline void poly_roots_in(std::span<const double> coeffs, double lo, double hi,
                          std::vector<double>& out) {
  const std::size_t deg = poly_effective_degree(coeffs);
  if (deg == 0) return;
  if (deg == 1) {
    const double r = -coeffs[0] / coeffs[1];
    if (r >= lo && r <= hi) out.push_back(r);
    return;
  }
  std::vector<double> crit;
  poly_roots_in(poly_derivative(coeffs.first(deg + 1)), lo, hi, crit);
  std::vector<double> nodes;
  nodes.reserve(crit.size() + 2);
  nodes.push_back(lo);
  for (double c : crit)
    if (c > nodes.back()) nodes.push_back(c);
  if (hi > nodes.back()) nodes.push_back(hi);

  auto f = [&](double s) { return poly_eval(coeffs.first(deg + 1), s); };
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    double u = nodes[i], v = nodes[i + 1];
    double fu = f(u), fv = f(v);
    if (fu == 0.0) {
      if (out.empty() || out.back() < u) out.push_back(u);
      continue;
    }
    if (fu * fv > 0.0) continue;
    for (int it = 0; it < 200 && (v - u) > 1e-13 * std::fmax(1.0, std::fmax(std::fabs(u), std::fabs(v)));
         ++it) {
      const double mid = 0.5 * (u + v);
      const double fm = f(mid);
      if (fm == 0.0) {
        u = v = mid;
        break;
      }
      if (fu * fm < 0.0) {
        v = mid;
      } else {
        u = mid;
        fu = fm;
      }
    }
    const double r = 0.5 * (u + v);
    if (out.empty() || out.back() < r) out.push_back(r);
  }
  if (f(hi) == 0.0 && (out.empty() || out.back() < hi)) out.push_back(hi);
}

inline std::vector<std::vector<double>> binomial_table(int n) {
  std::vector<std::vector<double>> c(n + 1);
  for (int i = 0; i <= n; ++i) {
    c[i].assign(i + 1, 1.0);
    for (int j = 1; j < i; ++j) c[i][j] = c[i - 1][j - 1] + c[i - 1][j];
  }
  return c;
}

}  // namespace detail

// Breakpointed polynomial with per-piece coefficients in the shifted variable
// (c - t_i); shifted coordinates keep large-offset evaluation conditioned.
struct PiecewisePolynomial {
  std::vector<double> breakpoints;           // t_0 < ... < t_m
  std::vector<std::vector<double>> pieces;   // pieces[i][k] multiplies (c - t_i)^k

  double a() const { return breakpoints.front(); }
  double b() const { return breakpoints.back(); }
  Interval interval() const { return {a(), b()}; }

  int degree() const {
    std::size_t d = 0;
    for (const auto& p : pieces) d = std::max(d, p.empty() ? 0 : p.size() - 1);
    return static_cast<int>(d);
  }

  std::size_t piece_index(double c) const {
    if (c <= breakpoints.front()) return 0;
    if (c >= breakpoints[breakpoints.size() - 2]) return pieces.size() - 1;
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), c);
    return static_cast<std::size_t>(it - breakpoints.begin()) - 1;
  }

  // Right-continuous piece convention: c in [t_i, t_{i+1}) evaluates piece i.
  double operator()(double c) const {
    const std::size_t i = piece_index(c);
    return detail::poly_eval(pieces[i], c - breakpoints[i]);
  }

  static PiecewisePolynomial constant(double v, Interval iv) {
    iv.validate();
    return {{iv.a, iv.b}, {{v}}};
  }
};

struct Extrema {
  double min_value = 0.0;
  double argmin = 0.0;
  double max_value = 0.0;
  double argmax = 0.0;
};

inline Extrema extrema(const PiecewisePolynomial& p) {
  Extrema ext;
  bool first = true;
  std::vector<double> roots;
  for (std::size_t i = 0; i < p.pieces.size(); ++i) {
    const double h = p.breakpoints[i + 1] - p.breakpoints[i];
    const auto& coeffs = p.pieces[i];
    roots.clear();
    if (coeffs.size() > 1) detail::poly_roots_in(detail::poly_derivative(coeffs), 0.0, h, roots);
    roots.push_back(0.0);
    roots.push_back(h);
    for (double s : roots) {
      const double v = detail::poly_eval(coeffs, s);
      const double c = p.breakpoints[i] + s;
      if (first || v < ext.min_value) {
        ext.min_value = v;
        ext.argmin = c;
      }
      if (first || v > ext.max_value) {
        ext.max_value = v;
        ext.argmax = c;
      }
      first = false;
    }
  }
  return ext;
}

struct SignCertificate {
  enum class Verdict { nonnegative_everywhere, violated_at };
  Verdict verdict = Verdict::nonnegative_everywhere;
  double min_value = 0.0;
  double argmin = 0.0;
  std::optional<double> witness;
  double tolerance = 0.0;

  bool nonnegative() const { return verdict == Verdict::nonnegative_everywhere; }
};

// Scale-relative default: 1e-9 * max(1, sup |p|).
inline double default_sign_tolerance(const PiecewisePolynomial& p) {
  const Extrema e = extrema(p);
  return 1e-9 * std::fmax(1.0, std::fmax(std::fabs(e.min_value), std::fabs(e.max_value)));
}

// Decides p >= 0 on its whole interval by exact critical-point enumeration:
// every piece is evaluated at both ends and at all real roots of its
// derivative, so no violation between grid points can hide.
inline SignCertificate certify_nonnegative(const PiecewisePolynomial& p, double tolerance) {
  if (tolerance < 0.0) raise(Errc::numerical_failure, "sign tolerance must be nonnegative");
  const Extrema e = extrema(p);
  SignCertificate cert;
  cert.min_value = e.min_value;
  cert.argmin = e.argmin;
  cert.tolerance = tolerance;
  if (e.min_value < -tolerance) {
    cert.verdict = SignCertificate::Verdict::violated_at;
    cert.witness = e.argmin;
  }
  return cert;
}

inline void validate_piecewise(const PiecewisePolynomial& p, double continuity_tol = 1e-10,
                               int degree_cap = -1) {
  if (p.breakpoints.size() < 2 || p.pieces.size() + 1 != p.breakpoints.size())
    raise(Errc::numerical_failure, "piece count must be breakpoint count minus one");
  for (std::size_t i = 0; i + 1 < p.breakpoints.size(); ++i)
    if (!(p.breakpoints[i] < p.breakpoints[i + 1]))
      raise(Errc::numerical_failure, "breakpoints must be strictly increasing");
  if (degree_cap >= 0 && p.degree() > degree_cap)
    raise(Errc::degree_cap_exceeded, "piece degree exceeds cap");
  if (p.degree() >= 1) {
    const Extrema e = extrema(p);
    const double scale = std::fmax(1.0, std::fmax(std::fabs(e.min_value), std::fabs(e.max_value)));
    for (std::size_t i = 0; i + 1 < p.pieces.size(); ++i) {
      const double h = p.breakpoints[i + 1] - p.breakpoints[i];
      const double left = detail::poly_eval(p.pieces[i], h);
      const double right = p.pieces[i + 1].empty() ? 0.0 : p.pieces[i + 1][0];
      if (std::fabs(left - right) > continuity_tol * scale)
        raise(Errc::numerical_failure, "discontinuity at an interior breakpoint");
    }
  }
}

// Exact piecewise polynomial c -> sum_{x_i <= c} p_i (c - x_i)^n on [a,b].
// Breakpoints are the atoms plus both endpoints; exponent 0 yields the
// right-continuous CDF step function.
inline PiecewisePolynomial lpm_curve(const DiscreteDistribution& dist, int exponent,
                                     int degree_cap = 8) {
  if (exponent < 0) raise(Errc::bad_order, "lpm exponent must be nonnegative");
  if (exponent > degree_cap) raise(Errc::degree_cap_exceeded, "lpm exponent exceeds degree cap");
  const Interval iv = dist.support_interval();
  const double tol = 1e-12 * iv.width();

  PiecewisePolynomial out;
  out.breakpoints.push_back(iv.a);
  for (double x : dist.atoms())
    if (x > out.breakpoints.back() + tol && x < iv.b - tol) out.breakpoints.push_back(x);
  out.breakpoints.push_back(iv.b);

  const auto binom = detail::binomial_table(exponent);
  out.pieces.resize(out.breakpoints.size() - 1);
  for (std::size_t i = 0; i + 1 < out.breakpoints.size(); ++i) {
    const double t = out.breakpoints[i];
    auto& coeffs = out.pieces[i];
    coeffs.assign(exponent + 1, 0.0);
    for (std::size_t j = 0; j < dist.size() && dist.atoms()[j] <= t + tol; ++j) {
      const double d = std::fmax(t - dist.atoms()[j], 0.0);
      const double pj = dist.probs()[j];
      double dpow = 1.0;  // d^(n-k), built from k = n downwards
      for (int k = exponent; k >= 0; --k) {
        coeffs[k] += pj * binom[exponent][k] * dpow;
        dpow *= d;
      }
    }
  }
  return out;
}

namespace detail {

inline std::vector<double> merge_breakpoints(const PiecewisePolynomial& p,
                                             const PiecewisePolynomial& q) {
  const double span = std::fmax(p.b() - p.a(), q.b() - q.a());
  const double tol = 1e-12 * std::fmax(span, 1e-300);
  if (std::fabs(p.a() - q.a()) > tol || std::fabs(p.b() - q.b()) > tol)
    raise(Errc::interval_mismatch, "piecewise operands live on different intervals");
  std::vector<double> merged;
  merged.reserve(p.breakpoints.size() + q.breakpoints.size());
  std::merge(p.breakpoints.begin(), p.breakpoints.end(), q.breakpoints.begin(),
             q.breakpoints.end(), std::back_inserter(merged));
  std::vector<double> out;
  for (double t : merged)
    if (out.empty() || t - out.back() > tol) out.push_back(t);
  out.front() = std::fmin(p.a(), q.a());
  out.back() = std::fmax(p.b(), q.b());
  return out;
}

// Coefficients of p on [left, right] re-centred at `left`.
inline std::vector<double> recentered_piece(const PiecewisePolynomial& p, double left,
                                            double right) {
  const std::size_t i = p.piece_index(0.5 * (left + right));
  return poly_shift(p.pieces[i], left - p.breakpoints[i]);
}

template <typename BinOp>
PiecewisePolynomial combine(const PiecewisePolynomial& p, const PiecewisePolynomial& q, BinOp op) {
  PiecewisePolynomial out;
  out.breakpoints = merge_breakpoints(p, q);
  out.pieces.resize(out.breakpoints.size() - 1);
  for (std::size_t i = 0; i + 1 < out.breakpoints.size(); ++i) {
    const double lo = out.breakpoints[i], hi = out.breakpoints[i + 1];
    auto pc = recentered_piece(p, lo, hi);
    auto qc = recentered_piece(q, lo, hi);
    std::vector<double> c(std::max(pc.size(), qc.size()), 0.0);
    for (std::size_t k = 0; k < c.size(); ++k)
      c[k] = op(k < pc.size() ? pc[k] : 0.0, k < qc.size() ? qc[k] : 0.0);
    out.pieces[i] = std::move(c);
  }
  return out;
}

}  // namespace detail

inline PiecewisePolynomial subtract(const PiecewisePolynomial& p, const PiecewisePolynomial& q) {
  return detail::combine(p, q, [](double x, double y) { return x - y; });
}

inline PiecewisePolynomial add(const PiecewisePolynomial& p, const PiecewisePolynomial& q) {
  return detail::combine(p, q, [](double x, double y) { return x + y; });
}

inline PiecewisePolynomial scale(PiecewisePolynomial p, double factor) {
  for (auto& piece : p.pieces)
    for (double& c : piece) c *= factor;
  return p;
}

inline PiecewisePolynomial derivative(const PiecewisePolynomial& p) {
  PiecewisePolynomial out;
  out.breakpoints = p.breakpoints;
  out.pieces.reserve(p.pieces.size());
  for (const auto& piece : p.pieces) out.pieces.push_back(detail::poly_derivative(piece));
  return out;
}

// Antiderivative pinned to a given value at the right endpoint; builds piece
// constants leftwards so the boundary value holds exactly.
inline PiecewisePolynomial antiderivative_from_right(const PiecewisePolynomial& p,
                                                     double value_at_b) {
  PiecewisePolynomial out;
  out.breakpoints = p.breakpoints;
  const std::size_t m = p.pieces.size();
  out.pieces.resize(m);
  std::vector<double> value_at_left(m + 1);
  value_at_left[m] = value_at_b;
  for (std::size_t i = m; i-- > 0;) {
    const double h = p.breakpoints[i + 1] - p.breakpoints[i];
    const auto& c = p.pieces[i];
    double integ = 0.0;
    double hpow = h;
    for (std::size_t k = 0; k < c.size(); ++k) {
      integ += c[k] * hpow / static_cast<double>(k + 1);
      hpow *= h;
    }
    value_at_left[i] = value_at_left[i + 1] - integ;
    auto& anti = out.pieces[i];
    anti.assign(c.size() + 1, 0.0);
    anti[0] = value_at_left[i];
    for (std::size_t k = 0; k < c.size(); ++k) anti[k + 1] = c[k] / static_cast<double>(k + 1);
  }
  return out;
}

// Sign of D(c) = LPM_{n,c}(F) - LPM_{n,c}(G) on the ray [b, infinity), where
// every atom lies below c and D collapses to one degree-n polynomial. Root
// isolation inside a Cauchy bound plus leading-coefficient analysis decide
// the unbounded part.
inline SignCertificate tail_nonnegative(const DiscreteDistribution& F,
                                        const DiscreteDistribution& G, int exponent,
                                        double tolerance, int degree_cap = 8) {
  if (exponent < 0) raise(Errc::bad_order, "lpm exponent must be nonnegative");
  if (exponent > degree_cap) raise(Errc::degree_cap_exceeded, "tail exponent exceeds degree cap");
  if (!same_interval(F.support_interval(), G.support_interval()))
    raise(Errc::interval_mismatch, "distributions live on different intervals");
  const double b = F.support_interval().b;

  SignCertificate cert;
  cert.tolerance = tolerance;
  cert.min_value = 0.0;
  cert.argmin = b;
  if (exponent == 0) return cert;  // both CDFs are 1 beyond b

  // Expand in s = c - b; coefficient k of s^k carries binom(n,k) * moment.
  const auto binom = detail::binomial_table(exponent);
  std::vector<double> coeffs(exponent + 1, 0.0), mags(exponent + 1, 0.0);
  for (int k = 0; k <= exponent; ++k) {
    double mf = 0.0, mg = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i)
      mf += F.probs()[i] * std::pow(b - F.atoms()[i], exponent - k);
    for (std::size_t i = 0; i < G.size(); ++i)
      mg += G.probs()[i] * std::pow(b - G.atoms()[i], exponent - k);
    coeffs[k] = binom[exponent][k] * (mf - mg);
    mags[k] = binom[exponent][k] * (mf + mg);
  }
  std::size_t deg = 0;
  for (std::size_t k = 0; k <= static_cast<std::size_t>(exponent); ++k) {
    if (std::fabs(coeffs[k]) <= 1e-12 * mags[k] + 1e-300) coeffs[k] = 0.0;
    if (coeffs[k] != 0.0) deg = k;
  }
  if (coeffs[deg] == 0.0) return cert;  // identically zero difference

  double bound = 1.0;
  for (std::size_t k = 0; k < deg; ++k)
    bound = std::fmax(bound, std::fabs(coeffs[k] / coeffs[deg]));
  bound = 1.0 + bound;

  auto eval = [&](double s) { return detail::poly_eval(coeffs, s); };
  double min_v = eval(0.0), min_s = 0.0;
  std::vector<double> crit;
  if (deg >= 1) {
    detail::poly_roots_in(detail::poly_derivative(std::span<const double>(coeffs.data(), deg + 1)),
                          0.0, bound, crit);
  }
  crit.push_back(bound);
  for (double s : crit) {
    const double v = eval(s);
    if (v < min_v) {
      min_v = v;
      min_s = s;
    }
  }

  if (coeffs[deg] < 0.0) {
    // Decreasing without bound; march outward until the violation is visible.
    double s = bound;
    for (int it = 0; it < 200 && eval(s) >= -tolerance; ++it) s *= 2.0;
    const double v = eval(s);
    if (v < min_v) {
      min_v = v;
      min_s = s;
    }
  }

  cert.min_value = min_v;
  cert.argmin = b + min_s;
  if (min_v < -tolerance) {
    cert.verdict = SignCertificate::Verdict::violated_at;
    cert.witness = b + min_s;
  }
  return cert;
}

}  // namespace bsdlab
