// Test-only grid-search oracle for the dominance-constrained portfolio
// problem: enumerates the weight simplex at a fixed step and checks every
// candidate with check_bsd. Independent of the solver's cutting-plane /
// subgradient path. For three assets the scan walks objective-sorted lines
// and exploits that the feasible set along a line is a contiguous interval
// (the constraint is convex), which reproduces the full-grid answer at a
// fraction of the cost.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "bsdlab/dominance.hpp"
#include "bsdlab/portfolio.hpp"
#include "bsdlab/scenario.hpp"

namespace bsdlab::testing {

inline bool oracle_feasible(const PortfolioProblem& problem, const std::vector<double>& w) {
  try {
    const auto port = portfolio_distribution(problem.table, w, problem.interval);
    return check_bsd(problem.benchmark, port, problem.exponent_n, problem.interval,
                     problem.tolerance)
        .holds;
  } catch (const Error&) {
    return false;
  }
}

inline double oracle_objective(const PortfolioProblem& problem, const std::vector<double>& w) {
  double v = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) v += w[i] * problem.table.expected_return(i);
  return v;
}

// Best objective over the step-grid on the simplex; nullopt when no grid
// point is feasible.
inline std::optional<double> oracle_best_objective(const PortfolioProblem& problem,
                                                   int steps = 1000) {
  const std::size_t k = problem.table.assets();
  std::optional<double> best;

  auto consider = [&](const std::vector<double>& w) {
    if (!oracle_feasible(problem, w)) return;
    const double obj = oracle_objective(problem, w);
    if (!best || obj > *best) best = obj;
  };

  if (k == 1) {
    consider({1.0});
    return best;
  }
  if (k == 2) {
    for (int i = 0; i <= steps; ++i) {
      const double x = static_cast<double>(i) / steps;
      consider({x, 1.0 - x});
    }
    return best;
  }
  if (k != 3) raise(Errc::bad_order, "oracle supports up to three assets");

  const double e1 = problem.table.expected_return(0);
  const double e2 = problem.table.expected_return(1);
  const double e3 = problem.table.expected_return(2);

  // Upper bound of the objective on the line x1 = t: the rest goes to the
  // better of assets 2 and 3.
  std::vector<int> order(steps + 1);
  for (int i = 0; i <= steps; ++i) order[i] = i;
  auto line_bound = [&](int i) {
    const double t = static_cast<double>(i) / steps;
    return e1 * t + (1.0 - t) * std::fmax(e2, e3);
  };
  std::sort(order.begin(), order.end(), [&](int a, int b) { return line_bound(a) > line_bound(b); });

  for (int idx : order) {
    if (best && line_bound(idx) <= *best + 1e-15) break;
    const double t = static_cast<double>(idx) / steps;
    const int m = steps - idx;  // x2 runs over {0, 1/steps, ..., m/steps}
    auto wt = [&](int j) {
      return std::vector<double>{t, static_cast<double>(j) / steps,
                                 1.0 - t - static_cast<double>(j) / steps};
    };
    auto feas = [&](int j) { return oracle_feasible(problem, wt(j)); };

    // Coarse bracketing of the feasible interval, then exact grid-index
    // bisection to its ends; fall back to the full line when the interval is
    // narrower than the coarse step.
    int seed = -1;
    const int coarse = std::max(1, m / 40);
    for (int j = 0; j <= m && seed < 0; j += coarse)
      if (feas(j)) seed = j;
    for (int j = 0; j <= m && seed < 0; ++j)  // interval narrower than the coarse step
      if (feas(j)) seed = j;
    if (seed < 0) continue;

    int lo = seed;
    {
      int bad = -1, good = seed;  // invariant: feas(good), !feas(bad) (bad==-1 means boundary)
      while (good - bad > 1) {
        const int mid = (good + bad) / 2;
        if (mid < 0) break;
        if (feas(mid))
          good = mid;
        else
          bad = mid;
      }
      lo = good;
    }
    int hi = seed;
    {
      int good = seed, bad = m + 1;
      while (bad - good > 1) {
        const int mid = (good + bad) / 2;
        if (mid > m) break;
        if (feas(mid))
          good = mid;
        else
          bad = mid;
      }
      hi = good;
    }
    consider(wt(lo));
    consider(wt(hi));
  }
  return best;
}

}  // namespace bsdlab::testing
