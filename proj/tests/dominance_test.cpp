#include <doctest.h>

#include <cmath>

#include "bsdlab/dominance.hpp"
#include "bsdlab/random.hpp"

using namespace bsdlab;

namespace {

const Interval unit{0.0, 1.0};

// Dense-grid oracle for the bounded inequality, independent of the
// certificate path: direct summation on a fine threshold grid.
double grid_min_margin(const DiscreteDistribution& F, const DiscreteDistribution& G, int exponent,
                       int points = 200000) {
  const Interval iv = F.support_interval();
  double mn = 1e300;
  for (int i = 0; i <= points; ++i) {
    const double c = iv.a + iv.width() * i / points;
    mn = std::fmin(mn, lpm_value(F, exponent, c) - lpm_value(G, exponent, c));
  }
  return mn;
}

DiscreteDistribution shift_up(const DiscreteDistribution& d, double delta) {
  std::vector<double> atoms = d.atoms();
  for (double& x : atoms) x += delta;
  return make_distribution(atoms, d.probs(), d.support_interval(), true);
}

}  // namespace

TEST_CASE("check_bsd on the theta lottery") {
  const auto [f, g] = theta_lottery(0.5, 2, unit);

  SUBCASE("reflexivity") {
    const auto v = check_bsd(f, f, 2, unit);
    CHECK(v.holds);
    CHECK(v.min_margin == doctest::Approx(0.0));
  }
  SUBCASE("G dominates F with zero margin at b") {
    const auto v = check_bsd(g, f, 2, unit);
    CHECK(v.holds);
    CHECK(v.min_margin == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(grid_min_margin(g, f, 2) >= -1e-12);
  }
  SUBCASE("F over G fails with an interior witness") {
    const auto v = check_bsd(f, g, 2, unit);
    CHECK_FALSE(v.holds);
    REQUIRE(v.witness_c.has_value());
    CHECK(*v.witness_c > 0.5);
    CHECK(*v.witness_c < 1.0);
    // minimum of max{c-1/2,0}^2 - c^2/4 sits at c = 2/3 with value -1/12
    CHECK(v.min_margin == doctest::Approx(-1.0 / 12.0));
    CHECK(v.min_margin == doctest::Approx(grid_min_margin(f, g, 2)).epsilon(1e-9));
    // spot check at c = 3/4
    CHECK(lpm_value(f, 2, 0.75) - lpm_value(g, 2, 0.75) == doctest::Approx(-0.078125));
  }
}

TEST_CASE("check_sd closed forms") {
  SUBCASE("delta_0 second-degree dominates delta_1 (exponent 1)") {
    const auto v = check_sd(point_mass(0.0, unit), point_mass(1.0, unit), 1);
    CHECK(v.holds);
  }
  SUBCASE("reflexivity") {
    const auto d = make_distribution({0.2, 0.7}, {0.5, 0.5}, unit);
    CHECK(check_sd(d, d, 2).holds);
  }
  SUBCASE("first-degree lottery CDFs cross: fails both ways") {
    const auto [f, g] = theta_lottery(0.5, 1, unit);
    CHECK_FALSE(check_sd(g, f, 0).holds);
    CHECK_FALSE(check_sd(f, g, 0).holds);
  }
  SUBCASE("tail can reject even when the bounded part holds") {
    // G = F shifted down: bounded inequality holds for F over G on [a,b],
    // but mean(F) > mean(G) keeps it holding on the ray too; the reverse
    // direction must fail.
    const auto f = make_distribution({0.2, 0.6}, {0.5, 0.5}, unit);
    const auto g = shift_up(f, 0.3);
    CHECK(check_sd(f, g, 1).holds);
    CHECK_FALSE(check_sd(g, f, 1).holds);
  }
}

TEST_CASE("check_lpm_at single-threshold order") {
  const auto [f, g] = theta_lottery(0.5, 2, unit);
  SUBCASE("exponent 1 at c=1: margin 0.25") {
    const auto v = check_lpm_at(f, g, 1, 1.0);
    CHECK(v.holds);
    CHECK(v.min_margin == doctest::Approx(0.25));
  }
  SUBCASE("exponent 1 at c=0.25: fails with margin -0.0625") {
    const auto v = check_lpm_at(f, g, 1, 0.25);
    CHECK_FALSE(v.holds);
    CHECK(v.min_margin == doctest::Approx(-0.0625));
    REQUIRE(v.witness_c.has_value());
    CHECK(*v.witness_c == doctest::Approx(0.25));
  }
  SUBCASE("thresholds at or below a hold with zero margin (exponent >= 1)") {
    const auto v = check_lpm_at(f, g, 1, 0.0);
    CHECK(v.holds);
    CHECK(v.min_margin == doctest::Approx(0.0));
  }
}

TEST_CASE("expected_utility_gap closed forms") {
  const auto [f, g] = theta_lottery(0.5, 2, unit);
  SUBCASE("identical distributions") {
    const auto u = affine_utility(0.0, 1.0, unit);
    CHECK(expected_utility_gap(f, f, u) == doctest::Approx(0.0));
  }
  SUBCASE("identity utility reads the mean difference") {
    const auto u = affine_utility(0.0, 1.0, unit);
    CHECK(expected_utility_gap(f, g, u) == doctest::Approx(0.25));
  }
  SUBCASE("negative quadratic ties the pair") {
    const auto u = neg_power(2, 1.0, unit);  // -(1-x)^2
    CHECK(expected_utility_gap(f, g, u) == doctest::Approx(0.0));
  }
  SUBCASE("log utility is undefined at zero atoms") {
    const auto u = power_crra_variant(1.0, 1.0, unit);
    CHECK_THROWS_AS(expected_utility_gap(f, g, u), Error);
  }
}

TEST_CASE("dominance order properties on comparable chains") {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const double a = rng.uniform(-1.0, 1.0);
    const Interval iv{a, a + rng.uniform(0.8, 2.0)};
    const int n = rng.uniform_int(1, 4);

    // F -> G -> H by two upward shifts: dominance must chain transitively.
    const int k = rng.uniform_int(1, 6);
    std::vector<double> atoms(k), probs(k);
    for (int i = 0; i < k; ++i) {
      atoms[i] = rng.uniform(iv.a, iv.a + 0.55 * iv.width());
      probs[i] = rng.uniform(0.05, 1.0);
    }
    const auto F = make_distribution(atoms, probs, iv, true);
    const double room = iv.b - F.atoms().back();
    const auto G = shift_up(F, rng.uniform(0.05, 0.45) * room);
    const auto H = shift_up(G, rng.uniform(0.05, 0.45) * room);

    const auto fg = check_bsd(F, G, n, iv);
    const auto gh = check_bsd(G, H, n, iv);
    const auto fh = check_bsd(F, H, n, iv);
    CHECK(fg.holds);
    CHECK(gh.holds);
    CHECK(fh.holds);
    CHECK(fh.min_margin >= -3e-9 * (1.0 + std::fabs(fh.min_margin)));

    // Unbounded dominance at the same exponent implies the bounded order.
    const auto sd = check_sd(F, G, n);
    if (sd.holds) CHECK(check_bsd(F, G, n, iv).holds);
  }
}

TEST_CASE("verdicts agree with the dense-grid oracle on random pairs") {
  Rng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const Interval iv{rng.uniform(-1.0, 0.0), rng.uniform(0.5, 1.5)};
    const int n = rng.uniform_int(1, 4);
    const int ka = rng.uniform_int(1, 7), kb = rng.uniform_int(1, 7);
    std::vector<double> xa(ka), pa(ka), xb(kb), pb(kb);
    for (int i = 0; i < ka; ++i) xa[i] = rng.uniform(iv.a, iv.b), pa[i] = rng.uniform(0.1, 1.0);
    for (int i = 0; i < kb; ++i) xb[i] = rng.uniform(iv.a, iv.b), pb[i] = rng.uniform(0.1, 1.0);
    const auto F = make_distribution(xa, pa, iv, true);
    const auto G = make_distribution(xb, pb, iv, true);

    const auto v = check_bsd(F, G, n, iv);
    const double oracle = grid_min_margin(F, G, n, 20000);
    const double scale = 1.0 + std::fabs(oracle);
    CHECK(v.min_margin <= oracle + 1e-10 * scale);
    if (v.holds)
      CHECK(oracle >= -1e-8 * scale);
    else
      CHECK(v.min_margin < 0.0);
  }
}
