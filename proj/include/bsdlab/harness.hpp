#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bsdlab/distribution.hpp"
#include "bsdlab/dominance.hpp"
#include "bsdlab/errors.hpp"
#include "bsdlab/generator.hpp"
#include "bsdlab/membership.hpp"
#include "bsdlab/random.hpp"
#include "bsdlab/utility.hpp"

namespace bsdlab {

// Parallelism cap from the environment; 0 means serial.
inline int env_thread_cap() {
  const char* v = std::getenv("BSD_LAB_THREADS");
  if (!v) return 0;
  const int n = std::atoi(v);
  return n < 0 ? 0 : n;
}

namespace detail {

// Runs fn(0..count-1); results must be written into per-index slots so serial
// and parallel schedules produce identical output.
template <typename Fn>
void parallel_for_indexed(int count, int threads, Fn&& fn) {
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  for (auto& th : pool) th.join();
}

struct SecondDiffVerdict {
  double slack = 1.0;
  double location = 0.0;
  bool convex = true;
  bool ambiguous = false;
};

inline SecondDiffVerdict second_difference_convexity(const std::vector<double>& xs,
                                                     const std::vector<double>& vals,
                                                     double tol = 1e-9) {
  double scale_v = 0.0, sdd = 0.0;
  for (double v : vals) scale_v = std::fmax(scale_v, std::fabs(v));
  std::vector<double> dd(vals.size() >= 2 ? vals.size() - 2 : 0);
  for (std::size_t i = 1; i + 1 < vals.size(); ++i) {
    dd[i - 1] = vals[i - 1] - 2.0 * vals[i] + vals[i + 1];
    sdd = std::fmax(sdd, std::fabs(dd[i - 1]));
  }
  SecondDiffVerdict out;
  const double denom = std::fmax(sdd, 5e-12 * std::fmax(scale_v, 1e-300) / tol);
  for (std::size_t i = 1; i + 1 < vals.size(); ++i) {
    const double s = dd[i - 1] / denom;
    if (s < out.slack) {
      out.slack = s;
      out.location = xs[i];
    }
  }
  out.convex = out.slack >= -tol;
  out.ambiguous = out.slack >= -10.0 * tol && out.slack <= -0.1 * tol;
  return out;
}

}  // namespace detail

inline DiscreteDistribution random_distribution(Rng& rng, Interval iv, int max_atoms,
                                                double upper_frac = 1.0) {
  const int k = rng.uniform_int(1, max_atoms);
  std::vector<double> atoms(k), probs(k);
  const double hi = iv.a + upper_frac * iv.width();
  for (int i = 0; i < k; ++i) {
    atoms[i] = rng.uniform(iv.a, hi);
    probs[i] = -std::log(1.0 - rng.uniform());
  }
  return make_distribution(std::move(atoms), std::move(probs), iv, true);
}

// ---------------------------------------------------------------------------
// Inequality checks: the n-th-root convexity duality and the sharpened Jensen chain

struct ConvexityDualityResult {
  bool gn_convex = false;
  bool kn_convex = false;
  double gn_slack = 0.0;
  double kn_slack = 0.0;
  bool ambiguous = false;
  bool u_member = false;  // the equivalence is only guaranteed inside U_n
  bool agree() const { return gn_convex == kn_convex; }
};

// Tests the equivalence between convexity of g_n(x) = (f(b)-f(x))^{1/n} on
// [a,b] and convexity of k_n(x) = -f(b - x^{1/n}) on [0,(b-a)^n]. The
// verdicts must agree whenever f is a U_n member; outside U_n they can and do
// split (the AP-but-not-LP witness), so membership is reported rather than
// silently assumed and only enforced on request.
inline ConvexityDualityResult check_root_convexity_duality(const UtilitySpec& f, int n, int grid_size = 1025,
                                         double tol = 1e-9, bool require_u_membership = false) {
  const bool u_member = check_U(f, n, std::min(grid_size, 513), 1e-8).member;
  if (require_u_membership && !u_member)
    raise(Errc::precondition_violated, "root-convexity duality requires f in U_n");
  const Interval iv = f.interval();
  const double fb = f(iv.b);

  std::vector<double> xs(grid_size), gn(grid_size), ys(grid_size), kn(grid_size);
  const double h = iv.width() / (grid_size - 1);
  const double span = std::pow(iv.width(), n);
  for (int i = 0; i < grid_size; ++i) {
    xs[i] = (i + 1 == grid_size) ? iv.b : iv.a + h * i;
    gn[i] = std::pow(std::fmax(fb - f(xs[i]), 0.0), 1.0 / n);
    ys[i] = span * i / (grid_size - 1);
    const double arg = std::clamp(iv.b - std::pow(ys[i], 1.0 / n), iv.a, iv.b);
    kn[i] = -f(arg);
  }
  const auto vg = detail::second_difference_convexity(xs, gn, tol);
  const auto vk = detail::second_difference_convexity(ys, kn, tol);
  ConvexityDualityResult r;
  r.gn_convex = vg.convex;
  r.kn_convex = vk.convex;
  r.gn_slack = vg.slack;
  r.kn_slack = vk.slack;
  r.ambiguous = vg.ambiguous || vk.ambiguous;
  r.u_member = u_member;

  // The x -> x^{1/n} warp can compress one side's violation region below the
  // other side's grid resolution (a nonconvex sliver hugging b maps to a
  // sub-grid sliver hugging 0, and vice versa). A split verdict whose failing
  // witness lands inside the other grid's first few cells is a resolution
  // artifact, not a counterexample.
  if (vg.convex != vk.convex) {
    if (!vg.convex) {
      const double y_image = std::pow(iv.b - vg.location, n);
      if (y_image < 4.0 * span / (grid_size - 1)) r.ambiguous = true;
    } else {
      const double x_image = iv.b - std::pow(vk.location, 1.0 / n);
      if (iv.b - x_image < 4.0 * iv.width() / (grid_size - 1)) r.ambiguous = true;
    }
  }
  return r;
}

struct JensenChainResult {
  double lhs = 0.0;  // E f(X)
  double mid = 0.0;  // f(b - (E(b-X)^n)^{1/n})
  double rhs = 0.0;  // f(E X)
  bool chain_holds = false;
};

// The sharpened Jensen chain for n,[a,b]-concave members of U_n.
inline JensenChainResult check_jensen_chain(const UtilitySpec& f, int n,
                                         const DiscreteDistribution& X, int grid_size = 1025,
                                         double tol = 1e-9) {
  if (!check_U(f, n, std::min(grid_size, 513), 1e-8).member ||
      !check_LP(f, n, std::min(grid_size, 513), 1e-8).member)
    raise(Errc::precondition_violated, "the Jensen chain requires f in U_n and LP_n");
  const Interval iv = f.interval();
  JensenChainResult r;
  double shortfall = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    r.lhs += X.probs()[i] * f(X.atoms()[i]);
    shortfall += X.probs()[i] * std::pow(iv.b - X.atoms()[i], n);
  }
  r.mid = f(std::clamp(iv.b - std::pow(shortfall, 1.0 / n), iv.a, iv.b));
  r.rhs = f(std::clamp(X.mean(), iv.a, iv.b));
  const double scale = 1.0 + std::fabs(r.lhs) + std::fabs(r.mid) + std::fabs(r.rhs);
  r.chain_holds = r.lhs <= r.mid + tol * scale && r.mid <= r.rhs + tol * scale;
  return r;
}

// ---------------------------------------------------------------------------
// Characterization harness

struct HarnessOptions {
  int trials = 100;
  std::vector<int> n_set = {1, 2, 3};
  int atom_budget = 8;
  std::uint64_t seed = 42;
  int threads = -1;  // -1 resolves BSD_LAB_THREADS, 0 serial
  int utilities_per_direction = 200;
  bool inject_tolerance_fault = false;  // test hook for the failure path
};

struct HarnessTrial {
  std::uint64_t trial_seed = 0;
  int index = 0;
  int n = 1;
  Interval interval;
  std::string mode;
  bool bsd_fg = false;
  bool bsd_gf = false;
  int utilities_tested = 0;
  std::optional<double> min_gap;
  std::optional<bool> refuted;
  bool forward_violation = false;
  bool converse_failure = false;
};

struct HarnessReport {
  HarnessOptions options;
  std::vector<HarnessTrial> trials;
  double elapsed_seconds = 0.0;

  int counterexamples() const {
    int c = 0;
    for (const auto& t : trials)
      if (t.forward_violation || t.converse_failure) ++c;
    return c;
  }

  std::string to_jsonl() const {
    std::ostringstream out;
    for (const auto& t : trials) {
      nlohmann::json j;
      j["seed"] = t.trial_seed;
      j["trial"] = t.index;
      j["n"] = t.n;
      j["interval"] = {t.interval.a, t.interval.b};
      j["mode"] = t.mode;
      j["bsd_FG"] = t.bsd_fg;
      j["bsd_GF"] = t.bsd_gf;
      j["utilities_tested"] = t.utilities_tested;
      if (t.min_gap)
        j["min_gap"] = *t.min_gap;
      else
        j["min_gap"] = nullptr;
      if (t.refuted)
        j["refuted_by_approximant"] = *t.refuted;
      else
        j["refuted_by_approximant"] = nullptr;
      j["forward_violation"] = t.forward_violation;
      j["converse_failure"] = t.converse_failure;
      out << j.dump() << "\n";
    }
    return out.str();
  }
};

namespace detail {

inline std::vector<UtilitySpec> named_generator_candidates(int n, Interval iv) {
  std::vector<UtilitySpec> named;
  for (int m = n; m <= n + 2; ++m) named.push_back(neg_power(m, iv.b, iv));
  named.push_back(constant_utility(1.0, iv));
  if (n == 2 && iv.a > 1e-9)
    for (double gamma : {0.5, 2.0, 3.0}) named.push_back(power_crra_variant(gamma, iv.b, iv));
  std::vector<UtilitySpec> out;
  for (auto& u : named)
    if (check_G(u, n, 129, 1e-8).member) out.push_back(std::move(u));
  return out;
}

// Verifies the forward implication for one holding direction A >= B: every
// generator member must weakly prefer B's side, gap(A,B,u) >= -1e-9 scaled.
inline void forward_sweep(const DiscreteDistribution& A, const DiscreteDistribution& B, int n,
                          Interval iv, int budget, Rng& rng, HarnessTrial& trial) {
  auto run_one = [&](const UtilitySpec& u) {
    double eb = 0.0, ea = 0.0;
    for (std::size_t i = 0; i < B.size(); ++i) eb += B.probs()[i] * u(B.atoms()[i]);
    for (std::size_t i = 0; i < A.size(); ++i) ea += A.probs()[i] * u(A.atoms()[i]);
    const double gap = eb - ea;
    const double scale = std::fabs(eb) + std::fabs(ea);
    if (gap < -1e-9 * (1.0 + scale)) trial.forward_violation = true;
    if (!trial.min_gap || gap < *trial.min_gap) trial.min_gap = gap;
    ++trial.utilities_tested;
  };
  const auto named = named_generator_candidates(n, iv);
  for (const auto& u : named) run_one(u);
  for (int i = static_cast<int>(named.size()); i < budget; ++i)
    run_one(random_generator_sample(rng, n, iv));
}

// Refutes a failing direction: the smoothed-kink approximant at the witness
// must produce a strictly negative expected-utility gap once the width is
// small enough.
inline bool refute_with_approximant(const DiscreteDistribution& A, const DiscreteDistribution& B,
                                    double witness, int n, Interval iv) {
  double width = 0.1 * iv.width();
  for (int level = 0; level < 26; ++level, width *= 0.5) {
    const UtilitySpec u = build_kink_approximant(witness, n, iv, width);
    double eb = 0.0, ea = 0.0;
    for (std::size_t i = 0; i < B.size(); ++i) eb += B.probs()[i] * u(B.atoms()[i]);
    for (std::size_t i = 0; i < A.size(); ++i) ea += A.probs()[i] * u(A.atoms()[i]);
    const double gap = eb - ea;
    if (gap < -1e-12 * (1.0 + std::fabs(eb) + std::fabs(ea))) return true;
    if (width < 1e-7 * iv.width()) break;
  }
  return false;
}

inline HarnessTrial run_harness_trial(const HarnessOptions& opt, int index) {
  Rng rng = Rng::substream(opt.seed, static_cast<std::uint64_t>(index));
  HarnessTrial trial;
  trial.index = index;
  trial.trial_seed = opt.seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  trial.n = opt.n_set[static_cast<std::size_t>(index) % opt.n_set.size()];

  const double a = rng.uniform(-2.0, 2.0);
  const Interval iv{a, a + rng.uniform(0.5, 3.0)};
  trial.interval = iv;

  const double mode_draw = rng.uniform();
  DiscreteDistribution F = point_mass(iv.a, iv), G = point_mass(iv.a, iv);
  if (mode_draw < 0.45) {
    trial.mode = "independent";
    F = random_distribution(rng, iv, opt.atom_budget);
    G = random_distribution(rng, iv, opt.atom_budget);
  } else if (mode_draw < 0.75) {
    trial.mode = "shifted";
    F = random_distribution(rng, iv, opt.atom_budget, 0.7);
    const double headroom = iv.b - F.atoms().back();
    const double delta = rng.uniform(0.05, 0.9) * headroom;
    std::vector<double> atoms = F.atoms();
    for (double& x : atoms) x += delta;
    G = make_distribution(std::move(atoms), F.probs(), iv, true);
  } else {
    trial.mode = "theta_lottery";
    auto [f, g] = theta_lottery(rng.uniform(0.05, 0.95), trial.n, iv);
    F = std::move(f);
    G = std::move(g);
  }

  if (opt.inject_tolerance_fault) {
    // Test hook: a corrupted (negative) certificate tolerance must surface as
    // a numerical failure, not as a silent verdict.
    certify_nonnegative(subtract(lpm_curve(F, trial.n), lpm_curve(G, trial.n)), -1e-9);
  }
  const DominanceVerdict vfg = check_bsd(F, G, trial.n, iv);
  const DominanceVerdict vgf = check_bsd(G, F, trial.n, iv);
  trial.bsd_fg = vfg.holds;
  trial.bsd_gf = vgf.holds;

  if (trial.bsd_fg) detail::forward_sweep(F, G, trial.n, iv, opt.utilities_per_direction, rng, trial);
  if (trial.bsd_gf) detail::forward_sweep(G, F, trial.n, iv, opt.utilities_per_direction, rng, trial);

  bool any_refutation_needed = false, all_refuted = true;
  if (!trial.bsd_fg && vfg.witness_c) {
    any_refutation_needed = true;
    all_refuted &= detail::refute_with_approximant(F, G, *vfg.witness_c, trial.n, iv);
  }
  if (!trial.bsd_gf && vgf.witness_c) {
    any_refutation_needed = true;
    all_refuted &= detail::refute_with_approximant(G, F, *vgf.witness_c, trial.n, iv);
  }
  if (any_refutation_needed) {
    trial.refuted = all_refuted;
    trial.converse_failure = !all_refuted;
  }
  return trial;
}

}  // namespace detail

// Property harness for the characterization: BSD holding in a direction means
// no generator member strictly prefers the other side; BSD failing means the
// witness-threshold approximant exhibits such a member.
inline HarnessReport run_characterization_harness(HarnessOptions opt) {
  if (opt.trials < 1) raise(Errc::bad_order, "harness needs at least one trial");
  if (opt.n_set.empty()) raise(Errc::bad_order, "harness needs a nonempty n set");
  if (opt.threads < 0) opt.threads = env_thread_cap();

  HarnessReport report;
  report.options = opt;
  report.trials.resize(opt.trials);
  std::vector<std::exception_ptr> errors(opt.trials);

  const auto t0 = std::chrono::steady_clock::now();
  detail::parallel_for_indexed(opt.trials, opt.threads, [&](int i) {
    try {
      report.trials[static_cast<std::size_t>(i)] = detail::run_harness_trial(opt, i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// ---------------------------------------------------------------------------
// Set-equality sweep: G = U&AP and AP = LP restricted to U members

struct SetEqualityOptions {
  int samples = 2000;
  std::vector<int> n_set = {2, 3, 4};
  std::uint64_t seed = 7;
  int threads = -1;
  int grid_size = 513;
  double tolerance = 1e-9;
};

struct SetEqualityResult {
  int samples = 0;
  int not_in_u = 0;
  int excluded = 0;
  int checked = 0;
  int disagree_g_ap = 0;
  int disagree_ap_lp = 0;
  int nesting_checked = 0;
  int nesting_violations = 0;

  double excluded_fraction() const {
    const int usable = samples - not_in_u;
    return usable > 0 ? static_cast<double>(excluded) / usable : 0.0;
  }
  int disagreements() const { return disagree_g_ap + disagree_ap_lp + nesting_violations; }
};

// Random member of U_n drawn from closed forms and integrated constructions;
// the interval is drawn alongside (positive intervals for the CRRA variant).
inline UtilitySpec random_u_member(Rng& rng, int n, Interval* iv_out) {
  const double pick = rng.uniform();
  Interval iv;
  if (pick >= 0.72 && pick < 0.82) {
    const double b = rng.uniform(0.6, 2.2);
    iv = {rng.uniform(0.05, 0.35) * b, b};
  } else {
    const double a = rng.uniform(-2.0, 2.0);
    iv = {a, a + rng.uniform(0.5, 3.0)};
  }
  if (iv_out) *iv_out = iv;
  if (pick < 0.42) return random_generator_sample(rng, n, iv);
  if (pick < 0.60) {
    const int m = std::max(1, n + rng.uniform_int(-2, 3));
    return neg_power(m, iv.b, iv);
  }
  if (pick < 0.72) {
    const int m = std::max(1, n + rng.uniform_int(-1, 2));
    const double delta = rng.uniform(0.05, 0.5) * iv.width();
    return neg_power(m, iv.b + delta, iv);
  }
  if (pick < 0.82) return power_crra_variant(rng.uniform(0.3, 4.0), iv.b, iv);
  if (pick < 0.92) {
    if (rng.coin()) return affine_utility(rng.uniform(-1.0, 1.0), rng.uniform(0.1, 2.0), iv);
    return constant_utility(rng.uniform(-1.0, 1.0), iv);
  }
  std::vector<std::pair<double, UtilitySpec>> terms;
  terms.emplace_back(rng.uniform(0.0, 2.0), random_generator_sample(rng, n, iv));
  terms.emplace_back(rng.uniform(0.0, 2.0), random_generator_sample(rng, n, iv));
  return linear_combination(std::move(terms), rng.uniform(-1.0, 1.0), iv);
}

inline SetEqualityResult run_set_equality_sweep(SetEqualityOptions opt) {
  if (opt.threads < 0) opt.threads = env_thread_cap();
  struct Row {
    bool not_in_u = false, excluded = false;
    bool d_g_ap = false, d_ap_lp = false;
    bool nest_checked = false, nest_violation = false;
  };
  std::vector<Row> rows(opt.samples);
  std::vector<std::exception_ptr> errors(opt.samples);

  detail::parallel_for_indexed(opt.samples, opt.threads, [&](int i) {
    try {
      Rng rng = Rng::substream(opt.seed * 3 + 1, static_cast<std::uint64_t>(i));
      const int n = opt.n_set[static_cast<std::size_t>(i) % opt.n_set.size()];
      Interval iv;
      const UtilitySpec u = random_u_member(rng, n, &iv);
      Row& row = rows[static_cast<std::size_t>(i)];

      const auto rU = check_U(u, n, opt.grid_size, opt.tolerance);
      if (!rU.member) {
        row.not_in_u = true;
        return;
      }
      const auto rAP = check_AP(u, n, opt.grid_size, opt.tolerance);
      const auto rLP = check_LP(u, n, opt.grid_size, opt.tolerance);
      const auto rG = check_G(u, n, opt.grid_size, opt.tolerance);
      if (rU.ambiguous() || rAP.ambiguous() || rLP.ambiguous() || rG.ambiguous()) {
        row.excluded = true;
        return;
      }
      row.d_g_ap = rG.member != rAP.member;
      row.d_ap_lp = rAP.member != rLP.member;

      if (n >= 2 && i % 4 == 0) {
        const auto rLPdown = check_LP(u, n - 1, opt.grid_size, opt.tolerance);
        if (!rLP.ambiguous() && !rLPdown.ambiguous()) {
          row.nest_checked = true;
          row.nest_violation = rLP.member && !rLPdown.member;
        }
      }
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  SetEqualityResult res;
  res.samples = opt.samples;
  for (const Row& r : rows) {
    if (r.not_in_u) {
      ++res.not_in_u;
      continue;
    }
    if (r.excluded) {
      ++res.excluded;
      continue;
    }
    ++res.checked;
    if (r.d_g_ap) ++res.disagree_g_ap;
    if (r.d_ap_lp) ++res.disagree_ap_lp;
    if (r.nest_checked) {
      ++res.nesting_checked;
      if (r.nest_violation) ++res.nesting_violations;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Inequality sweeps

struct InequalitySweepOptions {
  int samples = 500;
  std::vector<int> n_set = {2, 3, 4};
  std::uint64_t seed = 11;
  int threads = -1;
  int atom_budget = 8;
};

struct InequalitySweepResult {
  int duality_checked = 0;
  int duality_disagreements = 0;
  int chain_checked = 0;
  int chain_violations = 0;
  double best_mid_improvement = 0.0;  // max over samples of rhs - mid
  int violations() const { return duality_disagreements + chain_violations; }
};

inline InequalitySweepResult run_inequality_sweep(InequalitySweepOptions opt) {
  if (opt.threads < 0) opt.threads = env_thread_cap();
  struct Row {
    bool duality_checked = false, duality_disagree = false;
    bool chain_checked = false, chain_violation = false;
    double improvement = 0.0;
  };
  std::vector<Row> rows(opt.samples);
  std::vector<std::exception_ptr> errors(opt.samples);

  detail::parallel_for_indexed(opt.samples, opt.threads, [&](int i) {
    try {
      Rng rng = Rng::substream(opt.seed * 5 + 3, static_cast<std::uint64_t>(i));
      const int n = opt.n_set[static_cast<std::size_t>(i) % opt.n_set.size()];
      Interval iv;
      const UtilitySpec u = random_u_member(rng, n, &iv);
      Row& row = rows[static_cast<std::size_t>(i)];
      if (!check_U(u, n, 513, 1e-8).member) return;

      const auto c1 = check_root_convexity_duality(u, n, 1025);
      if (!c1.ambiguous) {
        row.duality_checked = true;
        row.duality_disagree = !c1.agree();
      }

      if (check_LP(u, n, 513, 1e-8).member) {
        const auto X = random_distribution(rng, iv, opt.atom_budget);
        const auto c2 = check_jensen_chain(u, n, X);
        row.chain_checked = true;
        row.chain_violation = !c2.chain_holds;
        row.improvement = c2.rhs - c2.mid;
      }
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  InequalitySweepResult res;
  for (const Row& r : rows) {
    if (r.duality_checked) {
      ++res.duality_checked;
      if (r.duality_disagree) ++res.duality_disagreements;
    }
    if (r.chain_checked) {
      ++res.chain_checked;
      if (r.chain_violation) ++res.chain_violations;
      res.best_mid_improvement = std::fmax(res.best_mid_improvement, r.improvement);
    }
  }
  return res;
}

}  // namespace bsdlab
