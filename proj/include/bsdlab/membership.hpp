#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bsdlab/errors.hpp"
#include "bsdlab/utility.hpp"

namespace bsdlab {

enum class UtilityClass { U, AP, LP, G };

inline const char* class_name(UtilityClass c) {
  switch (c) {
    case UtilityClass::U: return "U";
    case UtilityClass::AP: return "AP";
    case UtilityClass::LP: return "LP";
    case UtilityClass::G: return "G";
  }
  return "?";
}

struct ConditionSlack {
  std::string label;
  double slack = 1.0;      // normalized; decision is slack >= -tolerance
  double location = 0.0;
};

// Membership verdict with normalized slacks. A slack of zero means the
// condition binds exactly (common at x = b for genuine members); verdicts flip
// only near -tolerance, so the ambiguity band is one-sided below zero.
struct MembershipReport {
  UtilityClass class_id = UtilityClass::U;
  int n = 1;
  bool member = false;
  double worst_slack = 1.0;
  double worst_location = 0.0;
  double tolerance = 1e-9;
  std::vector<ConditionSlack> per_condition;
  std::vector<std::string> flags;

  // True when the verdict sits too close to the decision threshold to be
  // trusted for set-equality sweeps.
  bool ambiguous() const {
    return worst_slack >= -10.0 * tolerance && worst_slack <= -0.1 * tolerance;
  }
};

namespace detail {

struct ConditionAccum {
  std::string label;
  double slack = 1.0;
  double location = 0.0;
  bool touched = false;

  void fold(double s, double x) {
    if (!touched || s < slack) {
      slack = s;
      location = x;
    }
    touched = true;
  }
};

inline std::vector<double> uniform_grid(const Interval& iv, int grid_size) {
  if (grid_size < 3) raise(Errc::bad_order, "grid needs at least 3 points");
  std::vector<double> xs(grid_size);
  const double h = iv.width() / (grid_size - 1);
  for (int i = 0; i < grid_size; ++i) xs[i] = iv.a + h * i;
  xs.back() = iv.b;
  return xs;
}

inline MembershipReport finalize_report(UtilityClass cls, int n, double tolerance,
                                        std::vector<ConditionAccum> conds,
                                        std::vector<std::string> flags = {}) {
  MembershipReport rep;
  rep.class_id = cls;
  rep.n = n;
  rep.tolerance = tolerance;
  rep.flags = std::move(flags);
  bool first = true;
  for (auto& c : conds) {
    rep.per_condition.push_back({c.label, c.slack, c.location});
    if (first || c.slack < rep.worst_slack) {
      rep.worst_slack = c.slack;
      rep.worst_location = c.location;
      first = false;
    }
  }
  rep.member = rep.worst_slack >= -tolerance;
  return rep;
}

// Derivative samples deriv[k][i] = u^{(k)}(x_i) for k = 0..kmax.
inline std::vector<std::vector<double>> derivative_grid(const UtilitySpec& u, int kmax,
                                                        const std::vector<double>& xs) {
  std::vector<std::vector<double>> d(kmax + 1, std::vector<double>(xs.size()));
  for (int k = 0; k <= kmax; ++k)
    for (std::size_t i = 0; i < xs.size(); ++i) d[k][i] = u.deriv(k, xs[i]);
  return d;
}

inline double grid_abs_max(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::fmax(m, std::fabs(x));
  return m;
}

// Alternating-sign conditions (-1)^k u^{(k)} <= 0 for k = 1..n+1, slacks
// normalized by the grid maximum of |u^{(k)}|.
inline void fold_changing_derivative(const std::vector<double>& xs,
                                     const std::vector<std::vector<double>>& d, int n,
                                     std::vector<ConditionAccum>& out) {
  for (int k = 1; k <= n + 1; ++k) {
    ConditionAccum acc;
    acc.label = "sign_k" + std::to_string(k);
    const double scale = grid_abs_max(d[k]);
    if (scale <= 1e-300) {
      acc.fold(1.0, xs.front());  // identically zero derivative: vacuous
    } else {
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      for (std::size_t i = 0; i < xs.size(); ++i) acc.fold(-sign * d[k][i] / scale, xs[i]);
    }
    out.push_back(std::move(acc));
  }
}

}  // namespace detail

// Membership in U_{n,[a,b]}: (-1)^k u^{(k)} <= 0 on the grid for k = 1..n+1.
inline MembershipReport check_U(const UtilitySpec& u, int n, int grid_size = 2049,
                                double tolerance = 1e-9) {
  if (n < 1) raise(Errc::bad_order, "class order must be positive");
  if (u.max_derivative_order() < n + 1)
    raise(Errc::derivative_order_unavailable,
          "check_U needs derivatives to order " + std::to_string(n + 1));
  const auto xs = detail::uniform_grid(u.interval(), grid_size);
  const auto d = detail::derivative_grid(u, n + 1, xs);
  std::vector<detail::ConditionAccum> conds;
  detail::fold_changing_derivative(xs, d, n, conds);
  return detail::finalize_report(UtilityClass::U, n, tolerance, std::move(conds));
}

// z(x) = (n-1) u'(x) + u''(x)(b-x); nonpositive z is the Arrow-Pratt bound
// -u''/u' >= (n-1)/(b-x) in multiplied-out form.
inline double ap_slack(const UtilitySpec& u, int n, double x) {
  if (n < 1) raise(Errc::bad_order, "class order must be positive");
  return (n - 1) * u.deriv(1, x) + u.deriv(2, x) * (u.interval().b - x);
}

inline MembershipReport check_AP(const UtilitySpec& u, int n, int grid_size = 2049,
                                 double tolerance = 1e-9) {
  if (n < 1) raise(Errc::bad_order, "class order must be positive");
  if (u.max_derivative_order() < 2)
    raise(Errc::derivative_order_unavailable, "check_AP needs two derivatives");
  const Interval iv = u.interval();
  const auto xs = detail::uniform_grid(iv, grid_size);
  const auto d = detail::derivative_grid(u, 2, xs);

  std::vector<detail::ConditionAccum> conds(3);
  conds[0].label = "increasing";
  conds[1].label = "concave";
  conds[2].label = "arrow_pratt_bound";

  const double s1 = detail::grid_abs_max(d[1]);
  const double s2 = detail::grid_abs_max(d[2]);
  double sz = 0.0;
  std::vector<double> z(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    z[i] = (n - 1) * d[1][i] + d[2][i] * (iv.b - xs[i]);
    sz = std::fmax(sz, (n - 1) * std::fabs(d[1][i]) + std::fabs(d[2][i]) * (iv.b - xs[i]));
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    conds[0].fold(s1 <= 1e-300 ? 1.0 : d[1][i] / s1, xs[i]);
    conds[1].fold(s2 <= 1e-300 ? 1.0 : -d[2][i] / s2, xs[i]);
    conds[2].fold(sz <= 1e-300 ? 1.0 : -z[i] / sz, xs[i]);
  }
  return detail::finalize_report(UtilityClass::AP, n, tolerance, std::move(conds));
}

// R(x) = (u(x)-u(b)) u''(x) / u'(x)^2; the n,[a,b]-concavity criterion is
// R >= (n-1)/n wherever u' does not vanish.
inline double lp_ratio(const UtilitySpec& u, [[maybe_unused]] int n, double x) {
  const double u1 = u.deriv(1, x);
  if (std::fabs(u1) <= 1e-12)
    raise(Errc::vanishing_first_derivative, "lp_ratio needs u'(x) != 0");
  return (u(x) - u(u.interval().b)) * u.deriv(2, x) / (u1 * u1);
}

// Dual n,[a,b]-concavity check: (i) second-difference convexity of
// phi = (u(b)-u(x))^{1/n}; (ii) the differentiable ratio criterion in
// multiplied-out form (u(x)-u(b)) u'' >= ((n-1)/n) u'^2, which avoids the
// division blow-up where u' approaches zero. Both must pass; a robust
// disagreement raises a diagnostic flag.
inline MembershipReport check_LP(const UtilitySpec& u, int n, int grid_size = 2049,
                                 double tolerance = 1e-9) {
  if (n < 1) raise(Errc::bad_order, "class order must be positive");
  if (u.max_derivative_order() < 2)
    raise(Errc::derivative_order_unavailable, "check_LP needs two derivatives");
  const Interval iv = u.interval();
  const auto xs = detail::uniform_grid(iv, grid_size);
  const auto d = detail::derivative_grid(u, 2, xs);
  const double ub = d[0].back();

  std::vector<detail::ConditionAccum> conds(4);
  conds[0].label = "nondecreasing";
  conds[1].label = "root_decreasing";
  conds[2].label = "root_convex";
  conds[3].label = "ratio_criterion";

  const double scale_u = std::fmax(detail::grid_abs_max(d[0]), 1e-300);

  // u nondecreasing via first differences, floored against rounding noise.
  {
    std::vector<double> diff(xs.size() - 1);
    double sd = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      diff[i] = d[0][i + 1] - d[0][i];
      sd = std::fmax(sd, std::fabs(diff[i]));
    }
    const double denom = std::fmax(sd, 1e-12 * scale_u / tolerance);
    for (std::size_t i = 0; i < diff.size(); ++i) conds[0].fold(diff[i] / denom, xs[i]);
  }

  // phi = (u(b)-u(x))^{1/n}, clamped against negative rounding. Where the
  // shortfall u(b)-u(x) sinks below the cancellation noise of double
  // subtraction the root values carry no information, so those nodes are left
  // to the ratio criterion (which works off derivatives and has no such
  // blind spot); this is the flat-region division of labour between the two
  // tests.
  std::vector<double> phi(xs.size());
  std::vector<bool> resolvable(xs.size());
  const double w_floor = 1e-7 * scale_u;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double w = std::fmax(ub - d[0][i], 0.0);
    phi[i] = std::pow(w, 1.0 / n);
    resolvable[i] = w >= w_floor || i + 1 == xs.size();  // w(b) = 0 exactly
  }
  const double scale_phi = std::fmax(detail::grid_abs_max(phi), 1e-300);

  {
    std::vector<double> dec(xs.size() - 1, 0.0);
    double sd = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      if (!(resolvable[i] && resolvable[i + 1])) continue;
      dec[i] = phi[i] - phi[i + 1];
      sd = std::fmax(sd, std::fabs(dec[i]));
    }
    const double denom = std::fmax(sd, 1e-12 * scale_phi / tolerance);
    bool touched = false;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      if (!(resolvable[i] && resolvable[i + 1])) continue;
      conds[1].fold(dec[i] / denom, xs[i]);
      touched = true;
    }
    if (!touched) conds[1].fold(1.0, xs.front());
  }

  {
    double sdd = 0.0;
    std::vector<double> dd(xs.size() >= 2 ? xs.size() - 2 : 0, 0.0);
    std::vector<bool> use(dd.size(), false);
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
      if (!(resolvable[i - 1] && resolvable[i] && resolvable[i + 1])) continue;
      dd[i - 1] = phi[i - 1] - 2.0 * phi[i] + phi[i + 1];
      use[i - 1] = true;
      sdd = std::fmax(sdd, std::fabs(dd[i - 1]));
    }
    const double denom = std::fmax(sdd, 5e-12 * scale_phi / tolerance);
    bool touched = false;
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
      if (!use[i - 1]) continue;
      conds[2].fold(dd[i - 1] / denom, xs[i]);
      touched = true;
    }
    if (!touched) conds[2].fold(1.0, xs.front());
  }

  {
    const double r = static_cast<double>(n - 1) / n;
    double sq = 0.0;
    std::vector<double> q(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      q[i] = (d[0][i] - ub) * d[2][i] - r * d[1][i] * d[1][i];
      sq = std::fmax(sq, std::fabs(d[0][i] - ub) * std::fabs(d[2][i]) + d[1][i] * d[1][i]);
    }
    if (sq <= 1e-300) {
      conds[3].fold(1.0, xs.front());
    } else {
      for (std::size_t i = 0; i < xs.size(); ++i) conds[3].fold(q[i] / sq, xs[i]);
    }
  }

  std::vector<std::string> flags;
  const bool conv_ok = conds[2].slack >= -tolerance;
  const bool ratio_ok = conds[3].slack >= -tolerance;
  if (conv_ok != ratio_ok) {
    const double failing = std::fmin(conds[2].slack, conds[3].slack);
    if (failing < -10.0 * tolerance) flags.push_back("criteria_disagree");
  }
  const bool dec_ok = conds[1].slack >= -tolerance;
  const bool mono_ok = conds[0].slack >= -tolerance;
  if (dec_ok != mono_ok) flags.push_back("monotonicity_readings_disagree");

  return detail::finalize_report(UtilityClass::LP, n, tolerance, std::move(conds),
                                 std::move(flags));
}

// G_{n,[a,b]}: the U conditions plus vanishing derivatives u^{(k)}(b) = 0 for
// k = 1..n-1, each tested against the grid scale of that derivative.
inline MembershipReport check_G(const UtilitySpec& u, int n, int grid_size = 2049,
                                double tolerance = 1e-9) {
  if (n < 1) raise(Errc::bad_order, "class order must be positive");
  if (u.max_derivative_order() < n + 1)
    raise(Errc::derivative_order_unavailable,
          "check_G needs derivatives to order " + std::to_string(n + 1));
  const auto xs = detail::uniform_grid(u.interval(), grid_size);
  const auto d = detail::derivative_grid(u, n + 1, xs);
  std::vector<detail::ConditionAccum> conds;
  detail::fold_changing_derivative(xs, d, n, conds);
  for (int k = 1; k <= n - 1; ++k) {
    detail::ConditionAccum acc;
    acc.label = "boundary_k" + std::to_string(k);
    const double scale = detail::grid_abs_max(d[k]);
    if (scale <= 1e-300)
      acc.fold(1.0, u.interval().b);
    else
      acc.fold(-std::fabs(d[k].back()) / scale, u.interval().b);
    conds.push_back(std::move(acc));
  }
  return detail::finalize_report(UtilityClass::G, n, tolerance, std::move(conds));
}

// The explicit AP-but-not-LP witness g(x) = -(b-x)^{n+1}(1 - gamma(b-x)) with
// gamma = (n+1) / (2 b (n+2)), defined on [0, b].
inline UtilitySpec ap_only_witness(int n, double b) {
  if (n < 2) raise(Errc::bad_order, "ap_only_witness needs n >= 2");
  if (!(b > 0.0)) raise(Errc::bad_order, "ap_only_witness needs b > 0");
  const double gamma = (n + 1) / (2.0 * b * (n + 2));
  return ap_only_witness_utility(n, b, gamma, Interval{0.0, b});
}

}  // namespace bsdlab
