#include <doctest.h>

#include <cmath>

#include "bsdlab/dominance.hpp"
#include "bsdlab/generator.hpp"
#include "bsdlab/harness.hpp"
#include "bsdlab/membership.hpp"
#include "bsdlab/mollify.hpp"
#include "bsdlab/random.hpp"

using namespace bsdlab;

namespace {

const Interval unit{0.0, 1.0};

double sup_distance(const FunctionTable& f, const auto& g) {
  double d = 0.0;
  for (std::size_t i = 0; i < f.xs.size(); ++i)
    d = std::fmax(d, std::fabs(f.values[i] - g(f.xs[i])));
  return d;
}

}  // namespace

TEST_CASE("sample_generator_utility closed-form cross-checks") {
  SUBCASE("zero base and zero boundary give the zero utility") {
    const auto u = sample_generator_utility(3, unit, [](double) { return 0.0; }, 0.0);
    for (double x : {0.0, 0.3, 0.7, 1.0}) CHECK(u(x) == doctest::Approx(0.0));
  }
  SUBCASE("n=1, flat base, unit boundary slope integrates to x-1") {
    const auto u = sample_generator_utility(1, unit, [](double) { return 0.0; }, 1.0);
    for (double x : {0.0, 0.25, 0.6, 1.0}) {
      CHECK(u(x) == doctest::Approx(x - 1.0));
      CHECK(u.deriv(1, x) == doctest::Approx(1.0));
      CHECK(u.deriv(2, x) == doctest::Approx(0.0));
    }
  }
  SUBCASE("n=2, base 6, zero boundary integrates to -(1-x)^3") {
    const auto u = sample_generator_utility(2, unit, [](double) { return 6.0; }, 0.0);
    for (double x : {0.0, 0.2, 0.5, 0.9, 1.0}) {
      CHECK(u(x) == doctest::Approx(-std::pow(1.0 - x, 3)).epsilon(1e-12));
    }
    CHECK(check_G(u, 2).member);
  }
  SUBCASE("negative base is rejected") {
    CHECK_THROWS_AS(
        sample_generator_utility(2, unit, [](double x) { return x - 0.5; }, 0.0), Error);
  }
}

TEST_CASE("sampled generator utilities all pass check_G") {
  Rng rng(301);
  int members = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const double a = rng.uniform(-2.0, 2.0);
    const Interval iv{a, a + rng.uniform(0.4, 2.5)};
    const int n = rng.uniform_int(1, 4);
    const auto u = random_generator_sample(rng, n, iv);
    const auto rep = check_G(u, n, trial % 10 == 0 ? 1025 : 257, 1e-8);
    if (rep.member) ++members;
  }
  CHECK(members == 10000);
}

TEST_CASE("integrated tables: trapezoid consistency and exact boundary zeros") {
  Rng rng(373);
  for (int trial = 0; trial < 8; ++trial) {
    const Interval iv{rng.uniform(-1.0, 0.0), rng.uniform(0.5, 1.5)};
    const int n = rng.uniform_int(2, 4);
    const auto u = random_generator_sample(rng, n, iv);
    const auto& tab = integrated_table(u);
    REQUIRE(static_cast<int>(tab.derivative_tables.size()) == n + 2);

    for (int k = 1; k <= n - 1; ++k)
      CHECK(tab.derivative_tables[k].back() == 0.0);  // exact by construction

    const std::size_t m = tab.grid.size();
    for (int k = 0; k <= n; ++k) {
      const auto& lower = tab.derivative_tables[k];
      const auto& upper = tab.derivative_tables[k + 1];
      double scale = 1e-300;
      for (double v : lower) scale = std::fmax(scale, std::fabs(v));
      double acc = lower.back();
      double worst = 0.0;
      for (std::size_t i = m - 1; i-- > 0;) {
        acc -= 0.5 * (tab.grid[i + 1] - tab.grid[i]) * (upper[i] + upper[i + 1]);
        worst = std::fmax(worst, std::fabs(acc - lower[i]));
      }
      CHECK(worst <= 1e-8 * scale);
    }
  }
}

TEST_CASE("mollify") {
  SUBCASE("affine inputs are reproduced to 1e-10") {
    const auto f = tabulate(unit, 801, [](double x) { return 2.0 - 3.0 * x; });
    const auto g = mollify(f, {0.05, 0});
    double worst = 0.0;
    for (std::size_t i = 0; i < g.xs.size(); ++i)
      worst = std::fmax(worst, std::fabs(g.values[i] - (2.0 - 3.0 * g.xs[i])));
    CHECK(worst <= 1e-10);
  }
  SUBCASE("hinge smoothing stays convex, decreasing, and width-close") {
    auto hinge = [](double x) { return std::fmax(0.5 - x, 0.0); };
    const auto f = tabulate(unit, 2001, hinge);
    const auto g = mollify(f, {0.05, 0});
    CHECK(sup_distance(g, hinge) <= 0.05 + 1e-9);
    for (std::size_t i = 0; i + 1 < g.values.size(); ++i)
      CHECK(g.values[i + 1] - g.values[i] <= 1e-12);
    for (std::size_t i = 1; i + 1 < g.values.size(); ++i)
      CHECK(g.values[i - 1] - 2 * g.values[i] + g.values[i + 1] >= -1e-12);
  }
  SUBCASE("halving the width tightens the sup distance monotonically") {
    auto hinge = [](double x) { return std::fmax(0.5 - x, 0.0); };
    const auto f = tabulate(unit, 2001, hinge);
    double prev = 1e300;
    for (double width : {0.1, 0.05, 0.025}) {
      const double d = sup_distance(mollify(f, {width, 0}), hinge);
      CHECK(d <= prev + 1e-12);
      prev = d;
    }
    CHECK(prev <= 0.025);
  }
  SUBCASE("invalid inputs are rejected") {
    const auto rising = tabulate(unit, 101, [](double x) { return x; });
    CHECK_THROWS_AS(mollify(rising, {0.05, 0}), Error);
    const auto concave = tabulate(unit, 101, [](double x) { return -x * x; });
    CHECK_THROWS_AS(mollify(concave, {0.05, 0}), Error);
  }
  SUBCASE("random convex decreasing tables stay convex decreasing") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const double q = rng.uniform(1.0, 3.0), s = rng.uniform(0.1, 2.0);
      auto fn = [&](double x) { return s * std::pow(1.2 - x, q); };
      const auto f = tabulate(unit, 801, fn);
      const auto g = mollify(f, {rng.uniform(0.01, 0.2), 0});
      for (std::size_t i = 0; i + 1 < g.values.size(); ++i)
        CHECK(g.values[i + 1] - g.values[i] <= 1e-10);
      for (std::size_t i = 1; i + 1 < g.values.size(); ++i)
        CHECK(g.values[i - 1] - 2 * g.values[i] + g.values[i + 1] >= -1e-10);
    }
  }
}

TEST_CASE("smoothed kink approximant") {
  SUBCASE("kink at the left endpoint collapses to the zero utility") {
    const auto u = build_kink_approximant(0.0, 2, unit, 0.05);
    for (double x : {0.0, 0.4, 1.0}) CHECK(u(x) == doctest::Approx(0.0));
  }
  SUBCASE("expected utility approaches minus the lower partial moment") {
    const auto F = make_distribution({0.0, 1.0}, {0.5, 0.5}, unit);
    const auto u = build_kink_approximant(0.6, 2, unit, 0.02);
    double integral = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i) integral += F.probs()[i] * u(F.atoms()[i]);
    CHECK(std::fabs(integral + 0.18) <= 0.01);  // LPM_{2,0.6}(F) = 0.5 * 0.36
    CHECK(check_G(u, 2).member);
  }
  SUBCASE("width halvings decrease the integration error monotonically") {
    // Monotone decay is asserted between levels whose kernel windows both lie
    // inside (a, b): while the window still straddles an endpoint the error
    // constant changes regime (and signed contributions can cancel by luck),
    // so consecutive levels are not comparable there.
    Rng rng(441);
    for (int trial = 0; trial < 100; ++trial) {
      const double a = rng.uniform(-1.0, 1.0);
      const Interval iv{a, a + rng.uniform(0.6, 2.0)};
      const int n = rng.uniform_int(1, 4);
      const auto F = random_distribution(rng, iv, 6);
      const double c = rng.uniform(iv.a + 0.2 * iv.width(), iv.b);
      const double target = lpm_value(F, n, c);
      const double interior = std::fmin(c - iv.a, iv.b - c);
      double width = 0.08 * iv.width();
      double prev = 1e300, prev_width = 1e300;
      double err = 0.0;
      for (int level = 0; level < 5; ++level, width *= 0.5) {
        const auto u = build_kink_approximant(c, n, iv, width);
        double integral = 0.0;
        for (std::size_t i = 0; i < F.size(); ++i) integral += F.probs()[i] * u(F.atoms()[i]);
        err = std::fabs(integral + target);
        if (prev_width <= interior && width <= interior)
          CHECK(err <= prev * (1.0 + 1e-9) + 1e-13 * std::pow(iv.width(), n));
        prev = err;
        prev_width = width;
      }
      const double scale = std::fmax(1.0, std::pow(iv.width(), n));
      CHECK(err <= 1e-3 * scale);
    }
  }
  SUBCASE("approximants are generator members") {
    Rng rng(457);
    for (int trial = 0; trial < 40; ++trial) {
      const Interval iv{rng.uniform(-1.5, 0.5), rng.uniform(1.0, 2.0)};
      const int n = rng.uniform_int(1, 4);
      const double c = rng.uniform(iv.a, iv.b);
      const auto u = build_kink_approximant(c, n, iv, rng.uniform(0.005, 0.1) * iv.width());
      CHECK(check_G(u, n, 513, 1e-8).member);
    }
  }
}

TEST_CASE("iterated integrals") {
  CHECK(iterated_integral(point_mass(0.0, unit), 2, 1.0) == doctest::Approx(0.5));
  CHECK(iterated_integral(point_mass(0.3, unit), 3, 0.0) == doctest::Approx(0.0));
  const auto d = make_distribution({0.0, 1.0}, {0.5, 0.5}, unit);
  CHECK(iterated_integral(d, 1, 0.5) == doctest::Approx(0.25));

  // Consistency with the curve machinery: j! * W_{j+1}(c) = LPM_{j,c}.
  Rng rng(503);
  for (int trial = 0; trial < 50; ++trial) {
    const Interval iv{rng.uniform(-1.0, 0.0), rng.uniform(0.5, 1.5)};
    const auto W = random_distribution(rng, iv, 7);
    const int j = rng.uniform_int(1, 5);
    const auto curve = lpm_curve(W, j);
    double fact = 1.0;
    for (int i = 2; i <= j; ++i) fact *= i;
    for (int q = 0; q < 10; ++q) {
      const double c = rng.uniform(iv.a, iv.b);
      const double scale = std::fmax(1.0, std::pow(iv.width(), j));
      CHECK(std::fabs(iterated_integral(W, j, c) * fact - curve(c)) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("root-convexity duality") {
  SUBCASE("neg_power: both transforms affine, verdicts agree") {
    const auto r = check_root_convexity_duality(neg_power(3, 1.0, unit), 3);
    CHECK(r.u_member);
    CHECK(r.gn_convex);
    CHECK(r.kn_convex);
    CHECK(r.agree());
  }
  SUBCASE("crra variant for n=2 agrees convex") {
    const auto r = check_root_convexity_duality(power_crra_variant(2.0, 1.0, Interval{0.1, 1.0}), 2);
    CHECK(r.u_member);
    CHECK(r.agree());
    CHECK(r.gn_convex);
  }
  SUBCASE("the AP-only witness sits outside U_n and splits the verdicts") {
    const auto r = check_root_convexity_duality(ap_only_witness(2, 1.0), 2);
    CHECK_FALSE(r.u_member);
    CHECK_FALSE(r.gn_convex);  // LP fails near zero
    CHECK(r.kn_convex);        // AP holds, and k_n convexity is the AP bound
    CHECK_FALSE(r.agree());
    CHECK_THROWS_AS(check_root_convexity_duality(ap_only_witness(2, 1.0), 2, 1025, 1e-9, true), Error);
  }
}

TEST_CASE("sharpened jensen chain") {
  SUBCASE("negative quadratic on a fair coin") {
    const auto f = neg_power(2, 1.0, unit);
    const auto X = make_distribution({0.0, 1.0}, {0.5, 0.5}, unit);
    const auto r = check_jensen_chain(f, 2, X);
    CHECK(r.lhs == doctest::Approx(-0.5));
    CHECK(r.mid == doctest::Approx(-0.5));
    CHECK(r.rhs == doctest::Approx(-0.25));
    CHECK(r.chain_holds);
  }
  SUBCASE("negative cubic on a fair coin") {
    const auto f = neg_power(3, 1.0, unit);
    const auto X = make_distribution({0.0, 1.0}, {0.5, 0.5}, unit);
    const auto r = check_jensen_chain(f, 3, X);
    CHECK(r.lhs == doctest::Approx(-0.5));
    CHECK(r.mid == doctest::Approx(-0.5));
    CHECK(r.rhs == doctest::Approx(-0.125));
    CHECK(r.chain_holds);
  }
  SUBCASE("degenerate X collapses the chain") {
    const auto f = neg_power(2, 1.0, unit);
    const auto r = check_jensen_chain(f, 2, point_mass(0.4, unit));
    CHECK(r.lhs == doctest::Approx(r.mid));
    CHECK(r.mid == doctest::Approx(r.rhs));
  }
  SUBCASE("non-LP utilities are rejected") {
    CHECK_THROWS_AS(
        check_jensen_chain(affine_utility(0.0, 1.0, unit), 2, point_mass(0.4, unit)), Error);
  }
  SUBCASE("random members satisfy the chain and sometimes beat plain Jensen") {
    InequalitySweepOptions opt;
    opt.samples = 120;
    opt.seed = 23;
    const auto res = run_inequality_sweep(opt);
    CHECK(res.chain_violations == 0);
    CHECK(res.duality_disagreements == 0);
    CHECK(res.chain_checked > 30);
    CHECK(res.best_mid_improvement > 0.01);
  }
}

TEST_CASE("the lottery pair exercises both harness branches directly") {
  // Holding direction: every generator member weakly prefers the sure payoff;
  // failing direction: the kink approximant at the witness refutes it.
  const auto [F, G] = theta_lottery(0.5, 2, unit);
  Rng rng(733);
  for (int s = 0; s < 200; ++s) {
    const auto u = random_generator_sample(rng, 2, unit);
    const double gap = expected_utility_gap(G, F, u);
    CHECK(gap >= -1e-9);
  }
  const auto failing = check_bsd(F, G, 2, unit);
  REQUIRE_FALSE(failing.holds);
  REQUIRE(failing.witness_c.has_value());
  bool refuted = false;
  double width = 0.05;
  for (int level = 0; level < 6 && !refuted; ++level, width *= 0.5) {
    const auto u = build_kink_approximant(*failing.witness_c, 2, unit, width);
    refuted = expected_utility_gap(F, G, u) < 0.0;
  }
  CHECK(refuted);
}

TEST_CASE("characterization harness smoke runs clean") {
  HarnessOptions opt;
  opt.trials = 40;
  opt.n_set = {1, 2, 3};
  opt.seed = 20240;
  opt.threads = 0;
  opt.utilities_per_direction = 60;
  const auto report = run_characterization_harness(opt);
  CHECK(report.counterexamples() == 0);
  CHECK(report.trials.size() == 40);
  // at least one holding and one failing direction exercised across trials
  bool any_forward = false, any_refuted = false;
  for (const auto& t : report.trials) {
    if (t.utilities_tested > 0) any_forward = true;
    if (t.refuted && *t.refuted) any_refuted = true;
  }
  CHECK(any_forward);
  CHECK(any_refuted);

  // serial vs parallel: identical JSONL
  HarnessOptions par = opt;
  par.threads = 4;
  const auto report2 = run_characterization_harness(par);
  CHECK(report.to_jsonl() == report2.to_jsonl());
}

TEST_CASE("harness fault hook raises a numerical failure") {
  HarnessOptions opt;
  opt.trials = 2;
  opt.seed = 5;
  opt.threads = 0;
  opt.inject_tolerance_fault = true;
  CHECK_THROWS_AS(run_characterization_harness(opt), Error);
}
