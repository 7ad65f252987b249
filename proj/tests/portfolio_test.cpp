#include <doctest.h>

#include <cmath>

#include "bsdlab/portfolio.hpp"
#include "bsdlab/random.hpp"
#include "portfolio_oracle.hpp"

using namespace bsdlab;

namespace {

const Interval unit{0.0, 1.0};

// Benchmark generated from a random reference mix, so the problem is feasible
// by construction; optionally slackened by shifting the benchmark down.
PortfolioProblem random_problem(Rng& rng, int assets, int scenarios) {
  const Interval iv{0.0, 1.0};
  std::vector<std::vector<double>> rows(assets, std::vector<double>(scenarios));
  std::vector<double> probs(scenarios);
  for (auto& row : rows)
    for (double& r : row) r = rng.uniform(0.25, 0.75);
  for (double& p : probs) p = rng.uniform(0.2, 1.0);
  ScenarioTable table(rows, probs, {}, true);

  std::vector<double> ref(assets);
  double s = 0.0;
  for (double& w : ref) s += (w = rng.uniform(0.05, 1.0));
  for (double& w : ref) w /= s;
  // Shift the reference distribution down so the feasible set has a robust
  // interior (the reference mix stays feasible with slack).
  auto bench = portfolio_distribution(table, ref, iv);
  std::vector<double> atoms = bench.atoms();
  const double shift = rng.uniform(0.05, 0.6) * (bench.atoms().front() - iv.a);
  for (double& x : atoms) x -= shift;
  bench = make_distribution(atoms, bench.probs(), iv, true);
  return PortfolioProblem{std::move(table), std::move(bench), rng.uniform_int(1, 3), iv,
                          ConstraintDirection::portfolio_at_most_benchmark, 1e-8};
}

}  // namespace

TEST_CASE("simplex projection") {
  const auto p = project_to_simplex({0.4, 0.3, 0.3});
  CHECK(p[0] == doctest::Approx(0.4));
  const auto q = project_to_simplex({2.0, 0.0, 0.0});
  CHECK(q[0] == doctest::Approx(1.0));
  CHECK(q[1] == doctest::Approx(0.0));
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(rng.uniform_int(1, 6));
    for (double& x : v) x = rng.uniform(-3.0, 3.0);
    const auto w = project_to_simplex(v);
    double sum = 0.0;
    for (double x : w) {
      CHECK(x >= -1e-12);
      sum += x;
    }
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("constraint_violation on the theta lottery") {
  const auto [f, g] = theta_lottery(0.5, 2, unit);
  // Portfolio matching G against benchmark F: one asset paying 0 or 1.
  ScenarioTable table({{0.0, 1.0}}, {0.25, 0.75});
  PortfolioProblem problem{table, f, 2, unit, ConstraintDirection::portfolio_at_most_benchmark,
                           1e-8};
  const auto [viol, worst_c] = constraint_violation(problem, {1.0});

  // Dense-grid oracle for max of theta^2 c^2 - max{c-1/2,0}^2 over [0,1].
  double grid_max = -1e300, grid_arg = 0.0;
  for (int i = 0; i <= 1000000; ++i) {
    const double c = i / 1000000.0;
    const double v = 0.25 * c * c - std::pow(std::fmax(c - 0.5, 0.0), 2);
    if (v > grid_max) {
      grid_max = v;
      grid_arg = c;
    }
  }
  CHECK(viol == doctest::Approx(grid_max).epsilon(1e-9));
  CHECK(viol == doctest::Approx(1.0 / 12.0));
  CHECK(worst_c == doctest::Approx(grid_arg).epsilon(1e-4));
  CHECK(worst_c == doctest::Approx(2.0 / 3.0));

  // Reversed roles: the sure payoff never exceeds the lottery's curve.
  ScenarioTable sure({{0.5}}, {1.0});
  PortfolioProblem rev{sure, g, 2, unit, ConstraintDirection::portfolio_at_most_benchmark, 1e-8};
  const auto [viol2, worst2] = constraint_violation(rev, {1.0});
  CHECK(viol2 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("portfolio solve on hand-built instances") {
  SUBCASE("single feasible asset") {
    ScenarioTable table({{0.4, 0.6}}, {0.5, 0.5});
    const auto bench = portfolio_distribution(table, {1.0}, unit);
    PortfolioProblem problem{table, bench, 2, unit,
                             ConstraintDirection::portfolio_at_most_benchmark, 1e-8};
    const auto sol = solve(problem);
    REQUIRE(sol.weights.size() == 1);
    CHECK(sol.weights[0] == doctest::Approx(1.0));
    CHECK(sol.max_violation <= problem.tolerance);
  }
  SUBCASE("scenario-wise dominant asset takes all the weight") {
    // Asset 1 beats asset 2 in every scenario; benchmark is asset 2.
    ScenarioTable table({{0.55, 0.75, 0.6}, {0.45, 0.65, 0.5}}, {0.3, 0.4, 0.3});
    const auto bench = portfolio_distribution(table, {0.0, 1.0}, unit);
    PortfolioProblem problem{table, bench, 2, unit,
                             ConstraintDirection::portfolio_at_most_benchmark, 1e-8};
    const auto sol = solve(problem);
    CHECK(sol.weights[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(sol.expected_return == doctest::Approx(table.expected_return(0)).epsilon(1e-5));
    const auto oracle = testing::oracle_best_objective(problem);
    REQUIRE(oracle.has_value());
    CHECK(std::fabs(sol.expected_return - *oracle) <= 1e-3);
  }
  SUBCASE("unreachable benchmark is infeasible") {
    ScenarioTable table({{0.3, 0.5}, {0.4, 0.2}}, {0.5, 0.5});
    const auto bench = point_mass(0.9, unit);  // above every achievable return
    PortfolioProblem problem{table, bench, 1, unit,
                             ConstraintDirection::portfolio_at_most_benchmark, 1e-8};
    CHECK_THROWS_AS(solve(problem), Error);
    try {
      solve(problem);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::infeasible);
    }
  }
  SUBCASE("the literal constraint direction is refused") {
    ScenarioTable table({{0.4, 0.6}}, {0.5, 0.5});
    const auto bench = portfolio_distribution(table, {1.0}, unit);
    PortfolioProblem problem{table, bench, 2, unit, ConstraintDirection::benchmark_at_most_portfolio, 1e-8};
    CHECK_THROWS_AS(solve(problem), Error);
  }
}

TEST_CASE("portfolio solve matches the grid oracle on random problems") {
  Rng rng(8080);
  int solved = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const int assets = rng.uniform_int(1, 3);
    const int scenarios = rng.uniform_int(2, assets == 3 ? 10 : 30);
    const auto problem = random_problem(rng, assets, scenarios);
    const auto sol = solve(problem);
    ++solved;

    // post-solve contract: the returned weights re-verify
    const auto [viol, c] = constraint_violation(problem, sol.weights);
    CHECK(viol <= problem.tolerance);

    // outer loop monotonicity
    for (std::size_t i = 1; i < sol.outer_violations.size(); ++i)
      CHECK(sol.outer_violations[i] <= sol.outer_violations[i - 1] + 1e-12);

    const auto oracle = testing::oracle_best_objective(problem);
    REQUIRE(oracle.has_value());
    CHECK(sol.expected_return >= *oracle - 1e-3);
    CHECK(sol.expected_return <= *oracle + 1e-3);
  }
  CHECK(solved == 12);
}

TEST_CASE("redundant thresholds do not move the objective") {
  Rng rng(909);
  for (int trial = 0; trial < 6; ++trial) {
    const auto problem = random_problem(rng, rng.uniform_int(2, 3), rng.uniform_int(2, 8));
    const auto base = solve(problem);
    const double extra = rng.uniform(problem.interval.a, problem.interval.b);
    const auto with_extra = solve(problem, 40, {extra});
    CHECK(std::fabs(base.expected_return - with_extra.expected_return) <= 1e-4);
  }
}
