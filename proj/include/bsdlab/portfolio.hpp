#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bsdlab/distribution.hpp"
#include "bsdlab/errors.hpp"
#include "bsdlab/piecewise.hpp"
#include "bsdlab/scenario.hpp"

namespace bsdlab {

enum class ConstraintDirection {
  portfolio_at_most_benchmark,  // LPM(portfolio) <= LPM(benchmark): convex
  benchmark_at_most_portfolio,  // LPM(portfolio) >= LPM(benchmark): reverse-convex, rejected
};

struct PortfolioProblem {
  ScenarioTable table;
  DiscreteDistribution benchmark;
  int exponent_n = 1;
  Interval interval;
  ConstraintDirection direction = ConstraintDirection::portfolio_at_most_benchmark;
  double tolerance = 1e-8;

  void validate() const {
    interval.validate();
    if (exponent_n < 1) raise(Errc::bad_order, "portfolio exponent must be positive");
    if (!same_interval(benchmark.support_interval(), interval))
      raise(Errc::interval_mismatch, "benchmark must live on the problem interval");
    // Achievable returns stay inside [a,b] iff every scenario's min/max asset
    // return does (weights are a convex combination scenario-wise).
    for (std::size_t s = 0; s < table.scenarios(); ++s) {
      double lo = table.returns()[0][s], hi = lo;
      for (std::size_t i = 1; i < table.assets(); ++i) {
        lo = std::fmin(lo, table.returns()[i][s]);
        hi = std::fmax(hi, table.returns()[i][s]);
      }
      if (!interval.contains(lo) || !interval.contains(hi))
        raise(Errc::out_of_interval, "scenario returns can leave [a,b]");
    }
  }
};

struct PortfolioSolution {
  std::vector<double> weights;
  double expected_return = 0.0;
  std::vector<double> active_thresholds;
  int iterations = 0;
  double max_violation = 0.0;
  std::vector<double> outer_violations;  // certified violation per exchange round
};

// Euclidean projection onto the probability simplex, sorted-threshold method.
inline std::vector<double> project_to_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cssv = 0.0, theta = 0.0;
  int rho = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cssv += u[i];
    const double t = (cssv - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      rho = static_cast<int>(i + 1);
      theta = t;
    }
  }
  if (rho == 0) theta = (cssv - 1.0) / static_cast<double>(u.size());
  for (double& x : v) x = std::fmax(x - theta, 0.0);
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  if (s > 0.0)
    for (double& x : v) x /= s;
  return v;
}

// Max over c in [a,b] of LPM_{n,c}(portfolio) - LPM_{n,c}(benchmark), located
// by the certificate machinery on the difference curve.
inline std::pair<double, double> constraint_violation(const PortfolioProblem& problem,
                                                      const std::vector<double>& weights) {
  const DiscreteDistribution port =
      portfolio_distribution(problem.table, weights, problem.interval);
  const PiecewisePolynomial diff = subtract(lpm_curve(port, problem.exponent_n),
                                            lpm_curve(problem.benchmark, problem.exponent_n));
  const Extrema e = extrema(diff);
  return {e.max_value, e.argmax};
}

namespace detail {

struct FinitelyConstrained {
  const PortfolioProblem* problem;
  std::vector<double> thresholds;
  std::vector<double> benchmark_lpm;
  std::vector<double> mean_returns;

  double objective(const std::vector<double>& x) const {
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) v += mean_returns[i] * x[i];
    return v;
  }

  // max_c in C of LPM(portfolio) - LPM(benchmark) plus its subgradient in x.
  double worst_violation(const std::vector<double>& x, std::vector<double>* grad = nullptr) const {
    const auto& tab = problem->table;
    const int n = problem->exponent_n;
    std::vector<double> port(tab.scenarios());
    for (std::size_t s = 0; s < tab.scenarios(); ++s) port[s] = tab.portfolio_return(x, s);

    double worst = -1e300;
    std::size_t worst_idx = 0;
    for (std::size_t j = 0; j < thresholds.size(); ++j) {
      const double c = thresholds[j];
      double lpm = 0.0;
      for (std::size_t s = 0; s < tab.scenarios(); ++s) {
        const double d = c - port[s];
        if (d > 0.0) lpm += tab.scenario_probs()[s] * std::pow(d, n);
      }
      const double viol = lpm - benchmark_lpm[j];
      if (viol > worst) {
        worst = viol;
        worst_idx = j;
      }
    }
    if (grad) {
      grad->assign(x.size(), 0.0);
      const double c = thresholds[worst_idx];
      for (std::size_t s = 0; s < tab.scenarios(); ++s) {
        const double d = c - port[s];
        if (d > 0.0) {
          const double w = tab.scenario_probs()[s] * n * (n == 1 ? 1.0 : std::pow(d, n - 1));
          for (std::size_t i = 0; i < x.size(); ++i) grad->at(i) -= w * tab.returns()[i][s];
        }
      }
    }
    return worst;
  }
};

inline void subgradient_descent(const FinitelyConstrained& fc, std::vector<double>& x,
                                double penalty, int iterations, double feas_tol,
                                std::vector<double>* best_feasible, double* best_objective) {
  std::vector<double> grad, step(x.size());
  for (int t = 1; t <= iterations; ++t) {
    const double viol = fc.worst_violation(x, &grad);
    double gnorm = 0.0;
    if (viol > 0.0) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        step[i] = -fc.mean_returns[i] + penalty * grad[i];
        gnorm = std::fmax(gnorm, std::fabs(step[i]));
      }
    } else {
      for (std::size_t i = 0; i < x.size(); ++i) {
        step[i] = -fc.mean_returns[i];
        gnorm = std::fmax(gnorm, std::fabs(step[i]));
      }
      if (best_feasible && fc.objective(x) > *best_objective && viol <= feas_tol) {
        *best_feasible = x;
        *best_objective = fc.objective(x);
      }
    }
    if (gnorm <= 0.0) return;
    const double eta = 0.5 / (gnorm * std::sqrt(static_cast<double>(t)));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= eta * step[i];
    x = project_to_simplex(std::move(x));
  }
}

// Pairwise edge polish: the directions e_i - e_j positively span the simplex
// tangent cone, and feasibility along each direction is an interval by
// convexity, so bisection finds the largest improving step.
inline void edge_polish(const FinitelyConstrained& fc, std::vector<double>& x, double feas_tol) {
  const std::size_t k = x.size();
  for (int pass = 0; pass < 40; ++pass) {
    bool improved = false;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        if (i == j || fc.mean_returns[i] <= fc.mean_returns[j] + 1e-15 || x[j] <= 1e-15) continue;
        auto feasible_at = [&](double t) {
          std::vector<double> y = x;
          y[i] += t;
          y[j] -= t;
          return fc.worst_violation(y) <= feas_tol;
        };
        double lo = 0.0, hi = x[j];
        if (!feasible_at(hi)) {
          if (!feasible_at(0.0)) continue;
          for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
            const double mid = 0.5 * (lo + hi);
            (feasible_at(mid) ? lo : hi) = mid;
          }
          hi = lo;
        }
        if (hi > 1e-13) {
          x[i] += hi;
          x[j] -= hi;
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
}

inline bool solve_finite(const FinitelyConstrained& fc, std::vector<double>& x, double feas_tol) {
  // Feasibility phase: drive the worst violation down before optimizing.
  std::vector<double> grad;
  std::vector<double> best_x = x;
  double best_viol = fc.worst_violation(x);
  for (int t = 1; t <= 2000 && best_viol > 0.25 * feas_tol; ++t) {
    const double viol = fc.worst_violation(x, &grad);
    if (viol < best_viol) {
      best_viol = viol;
      best_x = x;
    }
    double gnorm = 0.0;
    for (double g : grad) gnorm = std::fmax(gnorm, std::fabs(g));
    if (gnorm <= 0.0) break;
    const double eta = 0.5 / (gnorm * std::sqrt(static_cast<double>(t)));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= eta * grad[i];
    x = project_to_simplex(std::move(x));
  }
  if (best_viol > feas_tol) {
    x = best_x;
    return false;  // the finite relaxation already looks infeasible
  }
  x = best_x;

  // Exact-penalty phase with doubling weight until the penalty optimum is
  // feasible, then a deterministic edge polish for the last digits.
  std::vector<double> best_feasible = x;
  double best_objective = fc.worst_violation(x) <= feas_tol ? fc.objective(x) : -1e300;
  double scale = 1.0;
  for (double m : fc.mean_returns) scale = std::fmax(scale, std::fabs(m));
  double penalty = 4.0 * scale;
  for (int round = 0; round < 14; ++round, penalty *= 2.0) {
    subgradient_descent(fc, x, penalty, 1500, feas_tol, &best_feasible, &best_objective);
    if (fc.worst_violation(x) <= feas_tol && round >= 2) break;
  }
  if (best_objective <= -1e299) return false;
  x = best_feasible;
  edge_polish(fc, x, feas_tol);
  if (fc.worst_violation(x) > feas_tol) x = best_feasible;
  return true;
}

}  // namespace detail

// Cutting-plane exchange for the semi-infinite problem: maximize expected
// return subject to LPM_{n,c}(portfolio) <= LPM_{n,c}(benchmark) on all of
// [a,b]. The threshold set starts from the benchmark atoms plus endpoints and
// grows by the certified worst violation until none exceeds the tolerance.
inline PortfolioSolution solve(const PortfolioProblem& problem, int max_iterations = 40,
                               const std::vector<double>& extra_thresholds = {}) {
  if (problem.direction == ConstraintDirection::benchmark_at_most_portfolio)
    raise(Errc::unsupported_direction,
          "the direction LPM(portfolio) >= LPM(benchmark) is reverse-convex; "
          "only portfolio_at_most_benchmark is solvable");
  problem.validate();
  if (max_iterations < 1) raise(Errc::bad_order, "need at least one outer iteration");

  detail::FinitelyConstrained fc;
  fc.problem = &problem;
  fc.mean_returns.resize(problem.table.assets());
  for (std::size_t i = 0; i < problem.table.assets(); ++i)
    fc.mean_returns[i] = problem.table.expected_return(i);

  fc.thresholds.push_back(problem.interval.a);
  for (double atom : problem.benchmark.atoms()) fc.thresholds.push_back(atom);
  for (double c : extra_thresholds)
    if (problem.interval.contains(c)) fc.thresholds.push_back(c);
  fc.thresholds.push_back(problem.interval.b);
  std::sort(fc.thresholds.begin(), fc.thresholds.end());
  fc.thresholds.erase(std::unique(fc.thresholds.begin(), fc.thresholds.end()),
                      fc.thresholds.end());

  auto refresh_benchmark = [&] {
    fc.benchmark_lpm.resize(fc.thresholds.size());
    for (std::size_t j = 0; j < fc.thresholds.size(); ++j)
      fc.benchmark_lpm[j] = lpm_value(problem.benchmark, problem.exponent_n, fc.thresholds[j]);
  };
  refresh_benchmark();

  double feas_tol = 0.5 * problem.tolerance;
  std::vector<double> x(problem.table.assets(),
                        1.0 / static_cast<double>(problem.table.assets()));

  PortfolioSolution sol;
  bool have_feasible = false;
  for (int outer = 1; outer <= max_iterations; ++outer) {
    if (!detail::solve_finite(fc, x, feas_tol))
      raise(Errc::infeasible, "no weight vector satisfies the finite threshold constraints");

    const auto [violation, worst_c] = constraint_violation(problem, x);
    sol.iterations = outer;
    sol.outer_violations.push_back(violation);
    if (violation <= problem.tolerance) {
      sol.weights = x;
      sol.max_violation = violation;
      have_feasible = true;
      break;
    }
    if (outer == max_iterations) {
      if (have_feasible) break;
      raise(Errc::iteration_limit, "exchange loop exhausted without certified feasibility");
    }
    bool fresh = true;
    for (double c : fc.thresholds)
      if (std::fabs(c - worst_c) <= 1e-12 * problem.interval.width()) fresh = false;
    if (fresh) {
      fc.thresholds.push_back(worst_c);
      std::sort(fc.thresholds.begin(), fc.thresholds.end());
      refresh_benchmark();
    } else {
      // The worst threshold is already enforced but not tightly enough:
      // sharpen the inner feasibility target instead of duplicating cuts.
      feas_tol = std::fmax(0.5 * feas_tol, 0.03125 * problem.tolerance);
    }
  }
  if (!have_feasible) raise(Errc::iteration_limit, "no feasible iterate found");

  sol.expected_return = fc.objective(sol.weights);
  const DiscreteDistribution port =
      portfolio_distribution(problem.table, sol.weights, problem.interval);
  for (std::size_t j = 0; j < fc.thresholds.size(); ++j) {
    const double c = fc.thresholds[j];
    const double gap = lpm_value(port, problem.exponent_n, c) - fc.benchmark_lpm[j];
    if (std::fabs(gap) <= 10.0 * problem.tolerance * (1.0 + std::fabs(fc.benchmark_lpm[j])))
      sol.active_thresholds.push_back(c);
  }
  return sol;
}

}  // namespace bsdlab
