#include "brwre/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "brwre/errors.hpp"
#include "brwre/parallel.hpp"
#include "brwre/rng.hpp"

namespace brwre {

namespace {

std::string num(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

bool all_counted_pass(const std::vector<CheckResult>& cs) {
  return std::all_of(cs.begin(), cs.end(), [](const CheckResult& c) { return c.advisory || c.pass; });
}

std::size_t count_failed(const std::vector<CheckResult>& cs) {
  return static_cast<std::size_t>(
      std::count_if(cs.begin(), cs.end(), [](const CheckResult& c) { return !c.advisory && !c.pass; }));
}

Environment det2(std::size_t n) { return Environment(OffspringLaw::deterministic(2), std::vector<int>(n, 2)); }

void tag(CheckResult& c, const std::string& label) { c.name += "[" + label + "]"; }

// ---- 1 ----
void bridge(const SuiteConfig& cfg, std::uint64_t seed, int threads, CriterionResult& out) {
  auto c = bridge_formula_check(cfg.bridge_a, cfg.bridge_b, cfg.bridge_sigma2, cfg.bridge_paths,
                                cfg.bridge_dt, seed, threads);
  CheckResult exact;
  exact.name = "bridge_closed_form";
  exact.value = bridge_below_zero_prob(-1.0, -1.0, 1.0);
  exact.reference = 1.0 - std::exp(-2.0);
  exact.margin = 1e-15 - std::fabs(exact.value - exact.reference);
  exact.pass = exact.margin >= 0.0;
  out.checks = {exact, c};
  out.summary = "MC " + num(c.value) + " vs " + num(c.reference) + ", z = " + num(3.0 - c.margin);
}

// ---- 2 ----
void engine_mc(const SuiteConfig& cfg, std::uint64_t seed, int threads, CriterionResult& out) {
  const Environment env = suite_environment({cfg.suite_law, 64}, seed, 0);
  for (std::size_t i = 0; i < cfg.mc_specs; ++i) {
    const auto spec = random_barrier_spec(env, seed, i);
    auto c = engine_vs_mc_check(env, spec, cfg.grid, cfg.mc_paths, derive_key("mc", seed, i), threads,
                                cfg.mc_rel_tol);
    tag(c, "spec " + std::to_string(i));
    out.checks.push_back(c);
  }
  out.summary = std::to_string(cfg.mc_specs - count_failed(out.checks)) + "/" +
                std::to_string(cfg.mc_specs) + " specs agree";
}

// ---- 3 ----
void many_to_one(const SuiteConfig& cfg, std::uint64_t seed, int threads, CriterionResult& out) {
  const std::size_t n = cfg.m2o_n;
  const Environment envs[2] = {det2(n), suite_environment({cfg.suite_law, n}, seed, 0)};
  for (int e = 0; e < 2; ++e) {
    const Environment& env = envs[e];
    const std::string lab = e == 0 ? "det2" : "suite";
    auto one = many_to_one_check(env, n, PathFunctional::constant(1.0), cfg.m2o_reps,
                                 derive_key("m2o", seed, 100 * e), threads);
    tag(one, lab + " f=1");
    auto ex = many_to_one_check(env, n, PathFunctional::exp_last(env.theta_star()), cfg.m2o_reps,
                                derive_key("m2o", seed, 100 * e + 1), threads);
    tag(ex, lab + " f=exp(theta x_n)");
    out.checks.push_back(one);
    out.checks.push_back(ex);
    for (std::size_t i = 0; i < cfg.m2o_random; ++i) {
      auto c = many_to_one_check(env, n, random_functional(env, n, seed, 10 * e + i), cfg.m2o_reps,
                                 derive_key("m2o", seed, 100 * e + 2 + i), threads);
      tag(c, lab + " random " + std::to_string(i));
      out.checks.push_back(c);
    }
  }
  out.summary = std::to_string(out.checks.size() - count_failed(out.checks)) + "/" +
                std::to_string(out.checks.size()) + " identities hold";
}

// ---- 4 ----
void breach(const SuiteConfig& cfg, std::uint64_t seed, int threads, CriterionResult& out) {
  const std::size_t n = cfg.breach_n;
  const Environment envs[2] = {det2(n), suite_environment({cfg.suite_law, n}, seed, 0)};
  double worst = INFINITY;
  for (int e = 0; e < 2; ++e) {
    auto cs = breach_checks(envs[e], cfg.breach_levels, n, cfg.breach_reps, derive_key("breach", seed, e),
                            threads);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      tag(cs[i], std::string(e == 0 ? "det2" : "suite") + " y=" + num(cfg.breach_levels[i]));
      worst = std::min(worst, cs[i].margin);
      out.checks.push_back(cs[i]);
    }
  }
  out.summary = "smallest margin " + num(worst);
}

// ---- 5 ----
void tilt(const SuiteConfig& cfg, std::uint64_t seed, int threads, CriterionResult& out) {
  const double t_max = *std::max_element(cfg.tilt_t.begin(), cfg.tilt_t.end());
  const Environment env = suite_environment({cfg.suite_law, static_cast<std::size_t>(t_max)}, seed, 0);
  std::size_t k = 0;
  for (double t : cfg.tilt_t)
    for (double c : cfg.tilt_c)
      for (const Curve& h : {Curve::zero(), Curve::neg_banana()}) {
        auto r = girsanov_tilt_check(env, t, h, c, cfg.tilt_y, cfg.tilt_y0, cfg.tilt_paths,
                                     derive_key("tilt", seed, k++), cfg.grid, threads);
        tag(r.check, "t=" + num(t) + " c=" + num(c) + " " + h.name());
        if (r.check.inconclusive) r.check.pass = false;
        out.checks.push_back(r.check);
      }
  out.summary = std::to_string(out.checks.size() - count_failed(out.checks)) + "/" +
                std::to_string(out.checks.size()) + " sandwiches hold";
}

// ---- 6 ----
struct AssocCase {
  double t, x_end;
  std::vector<double> times, thr;
  std::vector<bool> in_a;
};

void association(const SuiteConfig& cfg, std::uint64_t seed, int threads, CriterionResult& out) {
  const std::vector<AssocCase> cases = {
      {4.0, 0.0, {1, 2, 3}, {0, 0, 0}, {true, false, false}},
      {10.0, -1.0, {1, 3, 5, 7, 9}, {0.5, -0.2, 0.0, 0.3, 1.0}, {true, true, false, false, false}},
      {1.0, 0.5, {0.2, 0.4, 0.6, 0.8}, {0.1, 0.3, 0.2, 0.6}, {true, false, true, false}},
      {16.0, -3.0, {2, 4, 8, 12, 14}, {-0.5, -1.0, -1.5, -2.0, -2.5}, {true, true, false, false, false}},
      {6.0, 2.0, {1, 2, 3, 4, 5}, {1, 1, 1, 1, 1}, {false, false, true, false, false}},
  };
  double worst_z = 0.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    auto r = association_check(c.t, c.x_end, c.times, c.thr, c.in_a, cfg.assoc_reps,
                               derive_key("assoc", seed, i), threads);
    tag(r.check, "case " + std::to_string(i));
    worst_z = std::max(worst_z, r.worst_cov_z);
    out.checks.push_back(r.check);
  }
  out.summary = "worst covariance z " + num(worst_z);
}

// ---- 7 ----
void crude(const SuiteConfig& cfg, std::uint64_t seed, int threads, CriterionResult& out) {
  double gamma0 = cfg.gamma0;
  {
    const auto cal = calibrate_gamma0(cfg.gamma0_ladder, cfg.grid);
    CheckResult c;
    c.name = "gamma0_calibration";
    c.advisory = true;
    c.pass = cal.gamma0 > 0.0;
    c.value = cal.gamma0;
    c.reference = cfg.gamma0;
    c.metrics = {{"slope", cal.slope}};
    c.note = cfg.gamma0 > 0.0 ? "frozen value in use" : "calibrated value in use";
    out.checks.push_back(c);
    if (!(gamma0 > 0.0)) gamma0 = cal.gamma0;
  }
  const double t_max = std::max(cfg.crude_t, *std::max_element(cfg.crude_domination_t.begin(),
                                                               cfg.crude_domination_t.end()));
  const EnvConfig ec{cfg.suite_law, static_cast<std::size_t>(t_max)};
  const std::vector<Curve> curves{Curve::zero(), Curve::neg_banana(), Curve::pos_banana()};
  struct EnvOut {
    std::vector<double> gaps;
    CrudeLbReport rep;
  };
  auto per_env = parallel_map<EnvOut>(cfg.crude_envs, threads, [&](std::size_t e) {
    const Environment env = suite_environment(ec, seed, e);
    EnvOut o;
    for (double t : cfg.crude_domination_t)
      for (const Curve& h : curves) o.gaps.push_back(crude_lb_domination_gap(env, h, crude_lb_construct_g(env, h, t)));
    o.rep = crude_lb_check(env, Curve::zero(), cfg.crude_t, cfg.crude_y, cfg.crude_y0, gamma0, cfg.grid);
    return o;
  });
  std::size_t idx = 0;
  for (double t : cfg.crude_domination_t)
    for (const Curve& h : curves) {
      CheckResult c;
      c.name = "crude_domination[t=" + num(t) + " " + h.name() + "]";
      double worst = -INFINITY;
      for (const auto& o : per_env) worst = std::max(worst, o.gaps[idx]);
      c.value = worst;
      c.reference = 1e-9;
      c.margin = 1e-9 - worst;
      c.pass = c.margin >= 0.0;
      c.metrics = {{"envs", double(cfg.crude_envs)}};
      out.checks.push_back(c);
      ++idx;
    }
  std::size_t pass = 0, chain = 0;
  for (std::size_t e = 0; e < per_env.size(); ++e) {
    CheckResult c = per_env[e].rep.check;
    c.advisory = true;
    tag(c, "env " + std::to_string(e));
    pass += c.pass;
    chain += per_env[e].rep.below_g <= per_env[e].rep.lhs * (1.0 + 1e-6);
    out.checks.push_back(c);
  }
  CheckResult ch;
  ch.name = "crude_chain";
  ch.value = double(chain);
  ch.reference = double(cfg.crude_envs);
  ch.pass = chain == cfg.crude_envs;
  ch.margin = ch.value - ch.reference;
  out.checks.push_back(ch);
  CheckResult rate;
  rate.name = "crude_lower_bound_pass_rate";
  rate.value = double(pass) / double(cfg.crude_envs);
  rate.reference = cfg.crude_pass_rate;
  rate.margin = rate.value - rate.reference;
  rate.pass = rate.margin >= 0.0;
  rate.metrics = {{"gamma0", gamma0}, {"t", cfg.crude_t}};
  out.checks.push_back(rate);
  out.summary = "gamma0 " + num(gamma0) + ", pass rate " + num(rate.value);
}

// ---- 8 ----
void growth(const SuiteConfig& cfg, std::uint64_t seed, int threads, CriterionResult& out) {
  const std::size_t n_max = *std::max_element(cfg.growth_ns.begin(), cfg.growth_ns.end());
  const EnvConfig ec{cfg.suite_law, n_max};
  auto curves = parallel_map<GrowthCurve>(cfg.growth_envs, threads, [&](std::size_t e) {
    return log_pn_growth(suite_environment(ec, seed, e), cfg.growth_ns, cfg.xi0, cfg.grid);
  });
  for (std::size_t e = 0; e < curves.size(); ++e) {
    auto c = log_pn_growth_check({curves[e]}, cfg.growth_limit);
    c.metrics.push_back({"ratio_last", curves[e].ratio.back()});
    c.metrics.push_back({"running_max_last", curves[e].running_max.back()});
    tag(c, "env " + std::to_string(e));
    out.checks.push_back(c);
  }
  const auto all = log_pn_growth_check(curves, cfg.growth_limit);
  out.summary = "largest last-decade growth " + num(all.value) + " (limit " + num(cfg.growth_limit) + ")";
}

// ---- 9 ----
void tightness(const SuiteConfig& cfg, std::uint64_t seed, int threads, CriterionResult& out) {
  std::string s;
  for (std::size_t i = 0; i < cfg.tight_laws.size(); ++i) {
    TightnessConfig tc;
    tc.env = {cfg.tight_laws[i], 0};
    tc.envs = cfg.tight_envs;
    tc.replicas = cfg.tight_reps;
    tc.ns = cfg.tight_ns;
    tc.brw = cfg.tight_brw;
    tc.xi0 = cfg.xi0;
    tc.grid = cfg.grid;
    const auto rep = tightness_experiment(tc, derive_key("tight", seed, i), threads);
    auto c = tightness_check(rep, cfg.tight_iqr_factor, cfg.tight_spread_factor);
    for (const auto& row : rep.rows) {
      c.metrics.push_back({"iqr_n" + std::to_string(row.n), row.iqr});
      c.metrics.push_back({"median_n" + std::to_string(row.n), row.q50});
    }
    c.metrics.push_back({"samples_per_n", double(rep.rows.front().samples)});
    tag(c, cfg.tight_laws[i].describe());
    if (!s.empty()) s += "; ";
    s += cfg.tight_laws[i].describe() + ": " + c.note;
    out.checks.push_back(c);
  }
  out.summary = s;
}

// ---- 10 ----
void ratios(const SuiteConfig& cfg, std::uint64_t seed, int threads, CriterionResult& out) {
  const auto len = static_cast<std::size_t>(std::ceil(cfg.ratio_t));
  std::vector<Environment> envs{det2(len)};
  for (std::size_t e = 0; e < cfg.ratio_envs; ++e) envs.push_back(suite_environment({cfg.suite_law, len}, seed, e));
  const std::vector<Curve> curves{Curve::zero(), Curve::neg_banana()};
  struct Job {
    std::vector<CheckResult> checks;
  };
  auto jobs = parallel_map<Job>(envs.size() * curves.size(), threads, [&](std::size_t idx) {
    const Environment& env = envs[idx / curves.size()];
    const Curve& h = curves[idx % curves.size()];
    const std::string lab = (idx / curves.size() == 0 ? std::string("det2") : "env " + std::to_string(idx / curves.size() - 1)) +
                            " " + h.name();
    Job j;
    const auto gc = gamma_curve(env, h, cfg.ratio_t, cfg.gamma_ladder, GammaWindow::QuenchedWall, cfg.grid);
    CheckResult g;
    g.name = "gamma_hat[" + lab + "]";
    g.advisory = true;
    g.value = gc.sup_estimate;
    g.pass = gc.sup_estimate > 0.0;
    g.metrics = {{"slope", gc.slope_estimate}};
    j.checks.push_back(g);
    for (double y : cfg.ratio_y)
      for (double x : cfg.ratio_x) {
        auto r = ratio_start_shift(env, cfg.ratio_t, h, x, y, cfg.ratio_y0, cfg.ratio_c, gc.sup_estimate, cfg.grid);
        tag(r.check, lab + " y=" + num(y) + " x=" + num(x));
        j.checks.push_back(r.check);
      }
    return j;
  });
  double worst = INFINITY;
  for (auto& j : jobs)
    for (auto& c : j.checks) {
      if (!c.advisory) worst = std::min(worst, c.margin);
      out.checks.push_back(c);
    }
  out.summary = "smallest log margin " + num(worst);
}

}  // namespace

std::vector<CriterionResult> run_suite(const SuiteConfig& cfg, std::uint64_t seed, int threads,
                                       const SuiteProgress& progress) {
  using Fn = void (*)(const SuiteConfig&, std::uint64_t, int, CriterionResult&);
  const std::vector<std::pair<const char*, Fn>> table = {
      {"bridge_formula", bridge},     {"engine_vs_mc", engine_mc},   {"many_to_one", many_to_one},
      {"breach_bound", breach},       {"girsanov_sandwich", tilt},   {"association", association},
      {"crude_lower_bound", crude},   {"log_pn_growth", growth},     {"tightness", tightness},
      {"ratio_contracts", ratios}};
  for (int id : cfg.only)
    if (id < 1 || id > static_cast<int>(table.size()))
      throw ConfigError("unknown criterion " + std::to_string(id));
  std::vector<CriterionResult> out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!cfg.only.empty() && !cfg.only.count(id)) continue;
    CriterionResult r;
    r.id = id;
    r.name = table[i].first;
    const auto t0 = std::chrono::steady_clock::now();
    table[i].second(cfg, derive_key("criterion", seed, id), threads, r);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.pass = !r.checks.empty() && all_counted_pass(r.checks);
    if (progress) progress(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace brwre
