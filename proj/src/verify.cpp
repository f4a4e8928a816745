#include "brwre/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "brwre/centering.hpp"
#include "brwre/errors.hpp"
#include "brwre/parallel.hpp"
#include "brwre/rng.hpp"
#include "brwre/stats.hpp"

namespace brwre {

namespace {

constexpr double kEps = 1e-9;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

bool is_integer(double t) { return std::fabs(t - std::round(t)) < 1e-12; }

// min of the piecewise-linear W over [a, b].
double w_min(const Environment& env, double a, double b) {
  double m = std::min(env.w_at(a), env.w_at(b));
  for (double k = std::ceil(a); k <= b; k += 1.0) m = std::min(m, env.w_at(k));
  return m;
}

struct Counts {
  std::size_t a = 0, b = 0, ab = 0;
};

// Variance of the plug-in estimate of p_ab - p_a p_b from indicator counts.
double excess_variance(double pa, double pb, double pab, double n) {
  const double e2 = pab + pb * pb * pa + pa * pa * pb - 2.0 * pb * pab - 2.0 * pa * pab +
                    2.0 * pa * pb * pab;
  const double e1 = pab - 2.0 * pa * pb;
  return std::max(0.0, e2 - e1 * e1) / n;
}

}  // namespace

Environment suite_environment(const EnvConfig& cfg, std::uint64_t seed, std::size_t e) {
  return sample_environment(cfg, derive_key("suite", seed, e));
}

// ---- bridge crossing --------------------------------------------------------

BridgeOracle bridge_mc_oracle(double a, double b, double sigma2, std::size_t paths, double dt,
                              std::uint64_t seed, int threads) {
  if (!(sigma2 > 0.0)) throw DomainError("bridge time must be positive");
  if (paths < 2) throw ConfigError("bridge oracle needs at least two paths");
  const auto steps = static_cast<std::size_t>(std::llround(sigma2 / dt));
  if (steps < 16 || std::fabs(steps * dt - sigma2) > 1e-9 * sigma2)
    throw ConfigError("sigma2 must be a multiple of dt with at least 16 steps");
  const std::uint64_t key = derive_key("bridge-mc", seed);
  constexpr std::size_t kChunk = 8192;
  const std::size_t chunks = (paths + kChunk - 1) / kChunk;
  struct Part {
    std::size_t fine = 0, mid = 0, coarse = 0;
    MomentAccumulator comb;
  };
  auto parts = parallel_map<Part>(chunks, threads, [&](std::size_t c) {
    Part part;
    for (std::size_t p = c * kChunk; p < std::min(paths, (c + 1) * kChunk); ++p) {
      Sequence rng(key, p);
      double x = a;
      bool ok1 = a <= 0.0, ok4 = ok1, ok16 = ok1;
      for (std::size_t k = 1; k <= steps; ++k) {
        const double rem = sigma2 - (k - 1) * dt;
        if (k == steps) {
          x = b;
        } else {
          const double mean = x + (b - x) * dt / rem;
          const double var = dt * (rem - dt) / rem;
          x = mean + std::sqrt(var) * rng.normal();
        }
        if (x > 0.0) {
          ok1 = false;
          if (k % 4 == 0) ok4 = false;
          if (k % 16 == 0) ok16 = false;
        }
        if (!ok1 && !ok4 && !ok16) break;
      }
      // the endpoint is always observed
      if (b > 0.0) ok4 = ok16 = false;
      part.fine += ok1;
      part.mid += ok4;
      part.coarse += ok16;
      part.comb.add((8.0 * ok1 - 6.0 * ok4 + 1.0 * ok16) / 3.0);
    }
    return part;
  });
  BridgeOracle o;
  MomentAccumulator all;
  std::size_t f = 0, m = 0, cc = 0;
  for (const auto& p : parts) {
    all.merge(p.comb);
    f += p.fine;
    m += p.mid;
    cc += p.coarse;
  }
  const auto est = all.estimate();
  const double n = static_cast<double>(paths);
  o.estimate = est.mean;
  o.stderr_ = est.stderr_;
  o.raw_fine = f / n;
  o.raw_mid = m / n;
  o.raw_coarse = cc / n;
  o.paths = paths;
  return o;
}

CheckResult bridge_formula_check(double a, double b, double sigma2, std::size_t paths, double dt,
                                 std::uint64_t seed, int threads) {
  CheckResult r;
  r.name = "bridge_formula";
  const double exact = bridge_below_zero_prob(a, b, sigma2);
  const auto o = bridge_mc_oracle(a, b, sigma2, paths, dt, seed, threads);
  r.value = o.estimate;
  r.reference = exact;
  r.stderr_ = o.stderr_;
  const double z = o.stderr_ > 0.0 ? std::fabs(o.estimate - exact) / o.stderr_
                                   : (o.estimate == exact ? 0.0 : INFINITY);
  r.pass = z <= 3.0;
  r.margin = 3.0 - z;
  r.metrics = {{"a", a},         {"b", b},           {"sigma2", sigma2},         {"dt", dt},
               {"paths", double(paths)}, {"z", z},   {"raw_fine", o.raw_fine},
               {"raw_mid", o.raw_mid},   {"raw_coarse", o.raw_coarse}};
  r.note = "Richardson over monitoring at dt, 4dt, 16dt";
  return r;
}

// ---- engine vs simulation ---------------------------------------------------

BarrierSpec random_barrier_spec(const Environment& env, std::uint64_t seed, std::size_t index) {
  const Stream st(derive_key("spec", seed, index));
  BarrierSpec s;
  const double t_max = std::min(32.0, static_cast<double>(env.length()));
  if (t_max < 4.0) throw RangeError("environment too short for the spec suite");
  s.t = std::floor(4.0 + st.uniform(0) * (t_max - 3.0));
  s.t = std::min(s.t, t_max);
  const double u_shape = st.uniform(1);
  const double scale = 0.5 + 0.5 * st.uniform(2);
  if (u_shape < 1.0 / 3.0) s.curve = Curve::zero();
  else if (u_shape < 2.0 / 3.0) s.curve = Curve::neg_banana(1.0 / 6.0, scale);
  else s.curve = Curve::pos_banana(1.0 / 6.0, scale);
  s.drift_slope = -0.05 + 0.1 * st.uniform(3);
  s.start_offset = -3.0 + 2.5 * st.uniform(4);
  const double u_end = st.uniform(5);
  if (u_end < 0.25) {
    s.end = Window::any();
  } else {
    const double z = -0.3 - 1.2 * std::sqrt(s.t) * st.uniform(6);
    const double w = 1.0 + 2.0 * st.uniform(7);
    s.end = Window::of(z - w, z);
  }
  s.monitoring = st.uniform(8) < 0.5 ? Monitoring::Continuous : Monitoring::Discrete;
  if (st.uniform(9) < 0.25) s.free_until = std::floor(0.5 * s.t * st.uniform(10));
  if (st.uniform(11) < 0.2) s.t_start = 1.0 + std::floor(2.0 * st.uniform(12));
  return s;
}

CheckResult engine_vs_mc_check(const Environment& env, const BarrierSpec& spec, const GridConfig& grid,
                               std::size_t paths, std::uint64_t seed, int threads, double rel_tol) {
  CheckResult r;
  r.name = "engine_vs_mc";
  const auto prob = resolve(env, spec, grid.substeps);
  const double p = std::exp(barrier_log_probability(prob, grid));
  const auto mc = barrier_probability_mc(prob, paths, seed, threads);
  // binomial standard error under the engine value, so a zero-hit run is
  // not scored as exact
  const double n = static_cast<double>(paths);
  const double se = std::max(mc.stderr_, std::sqrt(std::max(0.0, p * (1.0 - p)) / n));
  const double tol = std::max(3.0 * se, rel_tol * p);
  const double diff = std::fabs(mc.estimate - p);
  r.value = mc.estimate;
  r.reference = p;
  r.stderr_ = se;
  r.pass = diff <= tol;
  r.margin = tol - diff;
  r.metrics = {{"t", spec.t},
               {"start", spec.start_offset},
               {"drift_slope", spec.drift_slope},
               {"discrete", spec.monitoring == Monitoring::Discrete ? 1.0 : 0.0},
               {"tolerance", tol},
               {"paths", n}};
  r.note = spec.curve.name();
  return r;
}

// ---- many-to-one, breach ----------------------------------------------------

PathFunctional random_functional(const Environment& env, std::size_t n, std::uint64_t seed,
                                 std::size_t index) {
  const Stream st(derive_key("functional", seed, index));
  if (st.uniform(0) < 0.5) {
    const double center = -3.0 + 3.0 * st.uniform(1);
    const double scale = 0.5 + 1.5 * st.uniform(2);
    const double amp = 0.5 + 1.5 * st.uniform(3);
    return PathFunctional::logistic_last(center, scale, amp);
  }
  BarrierSpec s;
  s.t = static_cast<double>(std::min(n, env.length()));
  s.monitoring = Monitoring::Discrete;
  s.start_offset = -1.0 - 2.0 * st.uniform(4);
  s.drift_slope = -0.2 * st.uniform(5);
  s.end = st.uniform(6) < 0.5 ? Window::any() : Window::of(-4.0 - 2.0 * st.uniform(7), -0.5);
  return PathFunctional::barrier_indicator(s);
}

CheckResult many_to_one_check(const Environment& env, std::size_t n, const PathFunctional& f,
                              std::size_t reps, std::uint64_t seed, int threads) {
  CheckResult r;
  r.name = "many_to_one";
  const auto lhs = many_to_one_lhs(env, n, f, reps, seed, threads);
  auto rhs = many_to_one_rhs(env, n, f, 10 * reps, seed, threads);
  const auto exact = many_to_one_rhs_exact(env, n, f);
  // lognormal weights: the sample stderr understates the spread, use the null one
  if (const auto m2 = many_to_one_rhs_second_moment(env, n, f); m2 && exact) {
    const double null_se = std::sqrt(std::max(0.0, *m2 - *exact * *exact) / static_cast<double>(rhs.reps));
    r.metrics.push_back({"rhs_sample_stderr", rhs.stderr_});
    rhs.stderr_ = std::max(rhs.stderr_, null_se);
  }
  r.value = lhs.estimate;
  r.reference = rhs.estimate;
  r.stderr_ = std::hypot(lhs.stderr_, rhs.stderr_);
  auto within = [](double est, double se, double target) {
    const double tol = std::max(3.0 * se, 1e-12 * std::max(1.0, std::fabs(target)));
    return std::fabs(est - target) <= tol;
  };
  bool ok = within(lhs.estimate, r.stderr_, rhs.estimate);
  r.margin = 3.0 * r.stderr_ - std::fabs(lhs.estimate - rhs.estimate);
  if (exact) {
    ok = ok && within(lhs.estimate, lhs.stderr_, *exact) && within(rhs.estimate, rhs.stderr_, *exact);
    r.reference = *exact;
    r.metrics.push_back({"exact", *exact});
  }
  r.pass = ok;
  r.metrics.push_back({"lhs", lhs.estimate});
  r.metrics.push_back({"lhs_stderr", lhs.stderr_});
  r.metrics.push_back({"rhs", rhs.estimate});
  r.metrics.push_back({"rhs_stderr", rhs.stderr_});
  r.metrics.push_back({"n", double(n)});
  return r;
}

std::vector<CheckResult> breach_checks(const Environment& env, const std::vector<double>& ys,
                                       std::size_t n, std::size_t reps, std::uint64_t seed,
                                       int threads) {
  const auto bs = breach_probabilities(env, ys, n, reps, seed, threads);
  std::vector<CheckResult> out;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const auto& b = bs[i];
    CheckResult r;
    r.name = "breach";
    r.value = b.estimate;
    r.reference = b.bound;
    r.stderr_ = b.stderr_;
    r.margin = b.bound + 3.0 * b.stderr_ - b.estimate;
    r.pass = r.margin >= 0.0;
    r.metrics = {{"y", ys[i]}, {"n", double(n)}, {"reps", double(reps)}};
    out.push_back(r);
  }
  return out;
}

CheckResult breach_check(const Environment& env, double y, std::size_t n, std::size_t reps,
                         std::uint64_t seed, int threads) {
  return breach_checks(env, {y}, n, reps, seed, threads).front();
}

// ---- Girsanov tilt ----------------------------------------------------------

TiltReport girsanov_tilt_check(const Environment& env, double t, const Curve& h, double c,
                               double y, double y0, std::size_t paths, std::uint64_t seed,
                               const GridConfig& grid, int threads) {
  if (t > static_cast<double>(env.length())) throw RangeError("tilt horizon beyond environment");
  if (paths < 10000) throw ConfigError("tilt check needs at least 1e4 paths");
  BarrierSpec base;
  base.t = t;
  base.curve = h;
  base.start_offset = y;
  base.end = Window::unit_below(y0);
  BarrierSpec tilted = base;
  tilted.drift_slope = c;
  const auto p0 = resolve(env, base, grid.substeps);
  const auto p1 = resolve(env, tilted, grid.substeps);

  TiltReport rep;
  rep.ratio_engine = std::exp(barrier_log_probability(p1, grid) - barrier_log_probability(p0, grid));
  const double ht = h.value(t, t);
  const double lb = -t * c * c / 2.0 - y * c - ht * c + env.w_at(t) * c;
  rep.lower = std::exp(lb - std::fabs(y0 - 1.0) * std::fabs(c));
  rep.upper = std::exp(lb + std::fabs(y0 - 1.0) * std::fabs(c));

  // Same Brownian path and kill uniform for both events.
  const std::uint64_t key = derive_key("tilt", seed);
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (paths + kChunk - 1) / kChunk;
  const std::size_t steps = p0.steps.size();
  auto parts = parallel_map<Counts>(chunks, threads, [&](std::size_t ch) {
    Counts cnt;
    for (std::size_t p = ch * kChunk; p < std::min(paths, (ch + 1) * kChunk); ++p) {
      Sequence rng(key, p);
      double u0 = p0.u0, u1 = p1.u0;
      bool a0 = u0 <= 0.0, a1 = u1 <= 0.0;
      for (std::size_t i = 0; i < steps && (a0 || a1); ++i) {
        const double var = p0.times[i + 1] - p0.times[i];
        const double z = std::sqrt(var) * rng.normal();
        const double u = rng.uniform();
        const double n0 = u0 + z - (p0.barrier[i + 1] - p0.barrier[i]);
        const double n1 = u1 + z - (p1.barrier[i + 1] - p1.barrier[i]);
        if (a0 && (n0 >= 0.0 || u < std::exp(-2.0 * u0 * n0 / var))) a0 = false;
        if (a1 && (n1 >= 0.0 || u < std::exp(-2.0 * u1 * n1 / var))) a1 = false;
        u0 = n0;
        u1 = n1;
      }
      a0 = a0 && u0 >= p0.end.lo && u0 <= p0.end.hi;
      a1 = a1 && u1 >= p1.end.lo && u1 <= p1.end.hi;
      cnt.a += a0;
      cnt.b += a1;
      cnt.ab += a0 && a1;
    }
    return cnt;
  });
  Counts tot;
  for (const auto& q : parts) {
    tot.a += q.a;
    tot.b += q.b;
    tot.ab += q.ab;
  }
  rep.hits_base = tot.a;
  rep.hits_tilted = tot.b;
  CheckResult& r = rep.check;
  r.name = "girsanov_tilt";
  r.reference = rep.ratio_engine;
  r.metrics = {{"t", t},         {"c", c},     {"y", y},      {"y0", y0},
               {"lower", rep.lower}, {"upper", rep.upper}, {"engine_ratio", rep.ratio_engine},
               {"hits_base", double(tot.a)}, {"hits_tilted", double(tot.b)}};
  r.note = h.name();
  if (tot.a == 0) {
    r.inconclusive = true;
    r.pass = false;
    r.note += "; no base hits";
    return rep;
  }
  const double n = static_cast<double>(paths);
  const double q0 = tot.a / n, q1 = tot.b / n, q01 = tot.ab / n;
  const double ratio = q1 / q0;
  const double var = (q1 * (1.0 - q1) / (q0 * q0) + q1 * q1 * q0 * (1.0 - q0) / std::pow(q0, 4) -
                      2.0 * q1 * (q01 - q0 * q1) / std::pow(q0, 3)) / n;
  rep.ratio_mc = ratio;
  rep.ratio_stderr = std::sqrt(std::max(0.0, var));
  r.value = ratio;
  r.stderr_ = rep.ratio_stderr;
  const double se3 = 3.0 * rep.ratio_stderr;
  r.margin = std::min(ratio - rep.lower + se3, rep.upper + se3 - ratio);
  r.pass = r.margin >= 0.0;
  return rep;
}

// ---- association on Brownian bridges ----------------------------------------

AssociationReport association_check(double t, double x_end, const std::vector<double>& times,
                                    const std::vector<double>& thresholds,
                                    const std::vector<bool>& in_a, std::size_t reps,
                                    std::uint64_t seed, int threads) {
  const std::size_t m = times.size();
  if (m == 0 || thresholds.size() != m || in_a.size() != m)
    throw ConfigError("association: times, thresholds and mask must have equal nonzero length");
  for (std::size_t i = 0; i < m; ++i) {
    if (!(times[i] > 0.0 && times[i] < t)) throw ConfigError("association: times must lie in (0, t)");
    if (i > 0 && !(times[i] > times[i - 1])) throw ConfigError("association: times must increase");
    if (std::isnan(thresholds[i])) throw ConfigError("association: threshold is NaN");
  }
  if (reps < 2) throw ConfigError("association: need at least two replicas");
  struct Part {
    Counts cnt;
    std::vector<double> s1, s2;  // sums and cross sums of positions
  };
  const std::uint64_t key = derive_key("assoc", seed);
  constexpr std::size_t kChunk = 8192;
  const std::size_t chunks = (reps + kChunk - 1) / kChunk;
  auto parts = parallel_map<Part>(chunks, threads, [&](std::size_t ch) {
    Part part;
    part.s1.assign(m, 0.0);
    part.s2.assign(m * m, 0.0);
    std::vector<double> x(m);
    for (std::size_t p = ch * kChunk; p < std::min(reps, (ch + 1) * kChunk); ++p) {
      Sequence rng(key, p);
      double prev_t = 0.0, prev_x = 0.0;
      bool a = true, b = true;
      for (std::size_t i = 0; i < m; ++i) {
        const double dt = times[i] - prev_t, rem = t - prev_t;
        const double mean = prev_x + (x_end - prev_x) * dt / rem;
        const double var = dt * (rem - dt) / rem;
        x[i] = mean + std::sqrt(var) * rng.normal();
        const bool ok = x[i] <= thresholds[i];
        if (in_a[i]) a = a && ok;
        else b = b && ok;
        prev_t = times[i];
        prev_x = x[i];
      }
      part.cnt.a += a;
      part.cnt.b += b;
      part.cnt.ab += a && b;
      for (std::size_t i = 0; i < m; ++i) {
        part.s1[i] += x[i];
        for (std::size_t j = i; j < m; ++j) part.s2[i * m + j] += x[i] * x[j];
      }
    }
    return part;
  });
  Counts tot;
  std::vector<CompensatedSum> s1(m), s2(m * m);
  for (const auto& q : parts) {
    tot.a += q.cnt.a;
    tot.b += q.cnt.b;
    tot.ab += q.cnt.ab;
    for (std::size_t i = 0; i < m; ++i) s1[i].add(q.s1[i]);
    for (std::size_t i = 0; i < m * m; ++i) s2[i].add(q.s2[i]);
  }
  const double n = static_cast<double>(reps);
  AssociationReport rep;
  rep.p_a = tot.a / n;
  rep.p_b = tot.b / n;
  rep.p_ab = tot.ab / n;
  rep.excess = rep.p_ab - rep.p_a * rep.p_b;
  rep.excess_stderr = std::sqrt(excess_variance(rep.p_a, rep.p_b, rep.p_ab, n));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      const double cov = (s2[i * m + j].value() - s1[i].value() * s1[j].value() / n) / (n - 1.0);
      const double ti = times[i], tj = times[j];
      const double want = ti * (t - tj) / t;
      const double vi = ti * (t - ti) / t, vj = tj * (t - tj) / t;
      const double se = std::sqrt((vi * vj + want * want) / n);
      rep.worst_cov_z = std::max(rep.worst_cov_z, std::fabs(cov - want) / se);
    }
  }
  CheckResult& r = rep.check;
  r.name = "association";
  r.value = rep.p_ab;
  r.reference = rep.p_a * rep.p_b;
  r.stderr_ = rep.excess_stderr;
  r.margin = rep.excess + 3.0 * rep.excess_stderr;
  r.pass = r.margin >= 0.0 && rep.worst_cov_z <= 4.0;
  r.metrics = {{"t", t},        {"x_end", x_end},         {"p_a", rep.p_a},
               {"p_b", rep.p_b}, {"excess", rep.excess},   {"worst_cov_z", rep.worst_cov_z}};
  return rep;
}

AssociationReport association_check(double t, double x_end, const std::vector<double>& times,
                                    const std::vector<double>& thresholds, std::size_t reps,
                                    std::uint64_t seed, int threads) {
  std::vector<bool> in_a(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) in_a[i] = 2 * i < times.size();
  return association_check(t, x_end, times, thresholds, in_a, reps, seed, threads);
}

// ---- crude lower bound ------------------------------------------------------

double GCurve::operator()(double s) const {
  if (s <= knots.front()) return values.front();
  if (s >= knots.back()) return values.back();
  const auto it = std::upper_bound(knots.begin(), knots.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - knots.begin()) - 1;
  const double w = (s - knots[i]) / (knots[i + 1] - knots[i]);
  return values[i] + w * (values[i + 1] - values[i]);
}

namespace {

// inf of q(s) on (a, b], sampled densely plus the limit at a.
template <class F>
double sampled_inf(F q, double a, double b, double limit_at_a) {
  double m = limit_at_a;
  const int k = 2048;
  for (int i = 1; i <= k; ++i) m = std::min(m, q(a + (b - a) * i / k));
  return m;
}

}  // namespace

GCurve crude_lb_construct_g(const Environment& env, const Curve& h, double t) {
  if (t < 6.0) throw RangeError("crude lower bound needs t >= 6");
  if (!is_integer(t)) throw RangeError("crude lower bound needs an integer horizon");
  if (t > static_cast<double>(env.length())) throw RangeError("horizon beyond environment");
  GCurve g;
  g.t = t;
  g.k1 = static_cast<int>(std::floor(std::log2(t / 3.0) + 1e-12));
  g.t1 = std::ldexp(1.0, g.k1);
  g.t2 = t - g.t1;
  g.w_t = env.w_at(t);
  g.h_t = h.value(t, t);
  const double wt = g.w_t, ht = g.h_t;
  auto neg_h = [&](double s) { return -h.value(s, t); };
  auto min_neg_h = [&](double a, double b) { return -h.max_on(a, b, t); };

  g.xi.assign(g.k1 + 1, 0.0);
  for (int j = 0; j < g.k1; ++j) {
    const double r = std::ldexp(1.0, j + 1);
    const double xw = std::min(w_min(env, 0.0, r), w_min(env, t - r, t) - wt);
    double xh = std::min(min_neg_h(0.0, r), min_neg_h(t - r, t) + ht);
    if (j == 0) {
      // s Xi_0 <= -h(s) on [0, 1] and (t-s) Xi_0 <= h_t(t) - h(s) on [t-1, t]
      const double slope0 = -h.sign() * h.scale * h.exponent;
      const double front = sampled_inf([&](double s) { return neg_h(s) / s; }, 0.0, 1.0, slope0);
      const double back = sampled_inf([&](double s) { return (ht - h.value(t - s, t)) / s; }, 0.0,
                                      1.0, slope0);
      xh = std::min({xh, front, back});
    }
    g.xi[j] = xw + xh;
  }
  {
    const double xw = std::min({w_min(env, 0.0, t), w_min(env, 0.0, t) - wt, 0.0});
    const double xh = std::min({min_neg_h(0.0, t), min_neg_h(0.0, t) + ht, 0.0});
    g.xi[g.k1] = xw + xh;
  }
  g.delta.assign(g.k1, 0.0);
  for (int j = 0; j < g.k1; ++j) g.delta[j] = (g.xi[j + 1] - g.xi[j]) / std::ldexp(1.0, j);

  const double end = wt - ht;
  g.knots = {0.0};
  g.values = {0.0};
  for (int j = 0; j <= g.k1; ++j) {
    g.knots.push_back(std::ldexp(1.0, j));
    g.values.push_back(g.xi[j]);
  }
  g.knots.push_back(g.t2);
  g.values.push_back(g.xi[g.k1] + end);
  for (int j = g.k1 - 1; j >= 0; --j) {
    g.knots.push_back(t - std::ldexp(1.0, j));
    g.values.push_back(g.xi[j] + end);
  }
  g.knots.push_back(t);
  g.values.push_back(end);
  return g;
}

double crude_lb_exponent(const GCurve& g, double y, double y0) {
  double e = 0.0;
  for (int j = 0; j < g.k1; ++j) {
    const double p = std::ldexp(1.0, j);
    e += g.delta[j] * g.delta[j] * p + 2.0 * (1.0 - std::pow(2.0, 1.5)) * g.delta[j] * std::sqrt(p);
  }
  const double x0 = g.xi[0];
  const double span = g.t2 - g.t1;
  e += x0 * x0 + x0 * (4.0 + y + y0);
  e += 3.0 * (g.w_t * g.w_t + g.h_t * g.h_t) / span;
  e += std::sqrt(g.t1) * (std::fabs(g.w_t) + std::fabs(g.h_t)) / span;
  return e;
}

double crude_lb_domination_gap(const Environment& env, const Curve& h, const GCurve& g) {
  const double t = g.t;
  const int points = 10000;
  double gap = -INFINITY;
  auto at = [&](double s) { gap = std::max(gap, g(s) - (env.w_at(s) - h.value(s, t))); };
  for (int i = 0; i <= points; ++i) at(t * i / points);
  for (double s : g.knots) at(s);
  return gap;
}

namespace {

double below_g_log_probability(const GCurve& g, double y, double y0, const GridConfig& grid) {
  std::vector<double> ts;
  const int per = std::max(1, grid.substeps);
  for (std::size_t i = 0; i + 1 < g.knots.size(); ++i) {
    const double a = g.knots[i], b = g.knots[i + 1];
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) * per - 1e-9)));
    for (int k = 0; k < pieces; ++k) ts.push_back(a + (b - a) * k / pieces);
  }
  ts.push_back(g.t);
  std::vector<double> lv(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) lv[i] = g(ts[i]);
  const auto prob = resolve_levels(ts, lv, y, Window::unit_below(y0), Monitoring::Continuous);
  return barrier_log_probability(prob, grid);
}

}  // namespace

CrudeLbReport crude_lb_check(const Environment& env, const Curve& h, double t, double y, double y0,
                             double gamma0, const GridConfig& grid) {
  if (!(gamma0 > 0.0)) throw ConfigError("crude lower bound needs a calibrated gamma0 > 0");
  const double rt = std::sqrt(t);
  if (y > 0.0 || y < -rt || y0 > 0.0 || y0 < -rt) throw RangeError("y and y0 must lie in [-sqrt t, 0]");
  const GCurve g = crude_lb_construct_g(env, h, t);
  CrudeLbReport rep;
  rep.dominance_gap = crude_lb_domination_gap(env, h, g);

  BarrierSpec spec;
  spec.t = t;
  spec.curve = h;
  spec.start_offset = y;
  spec.end = Window::unit_below(y0);
  const double log_lhs = barrier_log_probability(env, spec, grid);
  const double log_g = below_g_log_probability(g, y, y0, grid);
  rep.exponent = crude_lb_exponent(g, y, y0);
  const double log_rhs = -gamma0 * std::log(t) - rep.exponent;
  rep.lhs = std::exp(log_lhs);
  rep.below_g = std::exp(log_g);
  rep.rhs = std::exp(log_rhs);

  CheckResult& r = rep.check;
  r.name = "crude_lower_bound";
  r.value = log_lhs;
  r.reference = log_rhs;
  r.margin = log_lhs - log_rhs;
  // the chain P[below W - h] >= P[below g] is allowed grid-level slack
  const bool chain = log_lhs >= log_g - 1e-6;
  const bool dominated = rep.dominance_gap <= kEps;
  r.pass = dominated && chain && log_lhs >= log_rhs;
  r.metrics = {{"t", t},
               {"y", y},
               {"y0", y0},
               {"gamma0", gamma0},
               {"log_below_g", log_g},
               {"exponent", rep.exponent},
               {"dominance_gap", rep.dominance_gap},
               {"chain", chain ? 1.0 : 0.0}};
  r.note = h.name();
  return rep;
}

Gamma0Calibration calibrate_gamma0(const std::vector<double>& ts, const GridConfig& grid) {
  if (ts.size() < 3) throw ConfigError("gamma0 calibration needs at least three horizons");
  const double t_max = *std::max_element(ts.begin(), ts.end());
  const Environment env(OffspringLaw::deterministic(2),
                        std::vector<int>(static_cast<std::size_t>(std::ceil(t_max)), 2));
  Gamma0Calibration c;
  c.ts = ts;
  std::vector<double> lx, ly;
  double sup = 0.0;
  for (double t : ts) {
    BarrierSpec spec;
    spec.t = t;
    spec.start_offset = -1.0;
    spec.end = Window::unit_below(-1.0);
    const double lp = barrier_log_probability(env, spec, grid);
    c.lhs.push_back(std::exp(lp));
    lx.push_back(std::log(t));
    ly.push_back(lp);
    sup = std::max(sup, -lp / std::log(t));
  }
  c.slope = -least_squares(lx, ly).slope;
  c.gamma0 = std::max(c.slope, sup);
  return c;
}

// ---- quenched wall exponent -------------------------------------------------

GammaCurve gamma_curve(const Environment& env, const Curve& h, double t, const std::vector<double>& s_ladder,
                       GammaWindow window, const GridConfig& grid) {
  if (s_ladder.size() < 3) throw ConfigError("gamma ladder needs at least three points");
  for (std::size_t i = 0; i < s_ladder.size(); ++i) {
    const double s = s_ladder[i];
    if (!is_integer(s) || s < 2.0 || s > t / 2.0) throw RangeError("ladder points must be integers in [2, t/2]");
    if (i > 0 && !(s > s_ladder[i - 1])) throw ConfigError("gamma ladder must increase");
  }
  if (t > static_cast<double>(env.length())) throw RangeError("horizon beyond environment");
  const double c1 = c1_of(h, t);
  const double rt = std::sqrt(t);
  const double e1 = -4.0 * (c1 - 1.0) * rt, e2 = -2.0 * c1 * rt;
  const Window w = window == GammaWindow::Unrestricted ? Window::any()
                                                       : Window::of(std::min(e1, e2), std::max(e1, e2));
  BarrierSpec spec;
  spec.t = s_ladder.back();
  spec.curve = h;
  spec.curve_horizon = t;
  spec.start_offset = -1.0;
  spec.end = w;
  const auto prob = resolve(env, spec, grid.substeps);
  std::map<long long, double> found;
  for (double s : s_ladder) found[std::llround(s)] = -INFINITY;
  barrier_log_probability(prob, grid, [&](double s, const DensityGrid& g) {
    if (!is_integer(s)) return;
    auto it = found.find(std::llround(s));
    if (it == found.end()) return;
    const double m = w.unrestricted ? g.total() : g.window_mass(w.lo, w.hi);
    it->second = m > 0.0 ? std::log(m) + g.log_scale : -INFINITY;
  });
  GammaCurve c;
  c.s = s_ladder;
  std::vector<double> lx;
  c.sup_estimate = 0.0;
  for (double s : s_ladder) {
    const double lq = found[std::llround(s)];
    c.log_q.push_back(lq);
    lx.push_back(std::log(s));
    c.sup_estimate = std::max(c.sup_estimate, -lq / std::log(s));
  }
  c.slope_estimate = -least_squares(lx, c.log_q).slope;
  return c;
}

GammaReport gamma_hat(const EnvConfig& cfg, const Curve& h, const std::vector<double>& s_ladder,
                      std::size_t envs, std::uint64_t seed, GammaWindow window, const GridConfig& grid,
                      int threads) {
  if (envs == 0) throw ConfigError("gamma_hat needs at least one environment");
  if (s_ladder.empty()) throw ConfigError("gamma ladder is empty");
  const double t = 2.0 * s_ladder.back();
  EnvConfig ec = cfg;
  ec.length = std::max<std::size_t>(ec.length, static_cast<std::size_t>(t));
  GammaReport rep;
  rep.curves = parallel_map<GammaCurve>(envs, threads, [&](std::size_t e) {
    return gamma_curve(suite_environment(ec, seed, e), h, t, s_ladder, window, grid);
  });
  std::vector<double> sups, slopes;
  for (const auto& c : rep.curves) {
    sups.push_back(c.sup_estimate);
    slopes.push_back(c.slope_estimate);
  }
  rep.gamma_estimate = quantile(sups, 0.5);
  rep.gamma_slope = quantile(slopes, 0.5);
  return rep;
}

// ---- start-point shift ------------------------------------------------------

RatioReport ratio_start_shift(const Environment& env, double t, const Curve& h, double x, double y,
                              double y0, double c_const, double gamma, const GridConfig& grid) {
  if (!(y <= x && x <= 0.0)) throw RangeError("ratio_start_shift needs y <= x <= 0");
  if (y * y > t) throw RangeError("y^2 exceeds the horizon");
  BarrierSpec s;
  s.t = t;
  s.curve = h;
  s.end = Window::unit_below(y0);
  s.start_offset = x;
  RatioReport rep;
  const double lpx = barrier_log_probability(env, s, grid);
  s.free_until = y * y;
  const double lpxf = barrier_log_probability(env, s, grid);
  s.start_offset = y;
  const double lpyf = barrier_log_probability(env, s, grid);
  rep.p_x = std::exp(lpx);
  rep.p_x_free = std::exp(lpxf);
  rep.p_y_free = std::exp(lpyf);
  rep.ratio_windowed = std::exp(lpxf - lpx);
  rep.ratio_first = std::exp(lpyf - lpxf);

  const double c1 = c1_of(h, t);
  const double clog = c_log_of(env, t);
  const double log_lower = std::log(c_const) - 2.0 * c1 - clog * std::sqrt(std::log(y * y));
  rep.first_lower = std::exp(log_lower);
  const auto k = env_constants(env, h, t, 1.0, gamma);
  const double ay = std::fabs(y);
  rep.log_upper_windowed = -k.log_c2 + 2.0 * gamma * std::log(ay);
  rep.log_upper_first = -k.log_c2 + (gamma + 2.0) * std::log(4.0) + 4.0 * k.c1_curve +
                        (2.0 * gamma + 3.0 * k.c3) * std::log(ay);

  CheckResult& r = rep.check;
  r.name = "ratio_start_shift";
  r.value = rep.ratio_first;
  r.reference = rep.first_lower;
  // ratio_windowed >= 1 holds up to grid noise, which cancels to ~1e-9
  const bool windowed_ok = lpxf - lpx >= -1e-7;
  const bool first_ok = lpyf - lpxf >= log_lower;
  r.margin = std::min(lpxf - lpx, lpyf - lpxf - log_lower);
  r.pass = windowed_ok && first_ok;
  const bool neb_pre = t >= 64.0 && y >= -2.0 * std::pow(t, 0.25) && x <= -std::exp(1.0);
  r.metrics = {{"t", t},
               {"x", x},
               {"y", y},
               {"y0", y0},
               {"ratio_windowed", rep.ratio_windowed},
               {"ratio_first", rep.ratio_first},
               {"first_lower", rep.first_lower},
               {"c1", c1},
               {"c_log", clog},
               {"log_upper_windowed", rep.log_upper_windowed},
               {"log_upper_first", rep.log_upper_first},
               {"windowed_preconditions", neb_pre ? 1.0 : 0.0}};
  r.note = h.name();
  return rep;
}

// ---- p_n growth ---------------------------------------------------------------

GrowthCurve log_pn_growth(const Environment& env, const std::vector<std::size_t>& ns, double xi0,
                          const GridConfig& grid) {
  if (ns.size() < 2) throw ConfigError("growth ladder needs at least two points");
  for (std::size_t i = 1; i < ns.size(); ++i)
    if (ns[i] <= ns[i - 1]) throw ConfigError("growth ladder must increase");
  if (ns.front() < 2) throw ConfigError("growth ladder must start at n >= 2");
  if (static_cast<double>(ns.back()) < 100.0 * static_cast<double>(ns.front()))
    throw ConfigError("growth ladder must span two decades");
  GrowthCurve c;
  c.n = ns;
  const auto lp = log_p_n_sequence(env, ns, xi0, grid);
  double run = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double r = std::fabs(lp[i]) / std::log(static_cast<double>(ns[i]));
    c.ratio.push_back(r);
    run = std::max(run, r);
    c.running_max.push_back(run);
  }
  std::size_t ref = 0;
  for (std::size_t i = 0; i < ns.size(); ++i)
    if (10 * ns[i] <= ns.back()) ref = i;
  c.growth = c.running_max.back() / c.running_max[ref] - 1.0;
  return c;
}

CheckResult log_pn_growth_check(const std::vector<GrowthCurve>& curves, double limit) {
  CheckResult r;
  r.name = "log_pn_growth";
  if (curves.empty()) throw ConfigError("growth check needs at least one curve");
  double worst = -INFINITY;
  std::size_t failing = 0;
  for (const auto& c : curves) {
    worst = std::max(worst, c.growth);
    failing += !(c.growth < limit);
  }
  r.value = worst;
  r.reference = limit;
  r.margin = limit - worst;
  r.pass = failing == 0;
  r.metrics = {{"envs", double(curves.size())}, {"failing", double(failing)}};
  r.note = "largest last-decade growth of the running max of |log p_n|/log n";
  return r;
}

// ---- tightness ----------------------------------------------------------------

TightnessReport tightness_experiment(const TightnessConfig& cfg, std::uint64_t seed, int threads) {
  if (cfg.ns.empty()) throw ConfigError("tightness ladder is empty");
  if (cfg.envs == 0 || cfg.replicas == 0) throw ConfigError("tightness needs envs and replicas > 0");
  const std::size_t n_max = *std::max_element(cfg.ns.begin(), cfg.ns.end());
  EnvConfig ec = cfg.env;
  ec.length = std::max(ec.length, n_max);

  struct EnvJob {
    std::vector<double> m;
    std::vector<std::vector<double>> centered;
    std::size_t substituted = 0;
    bool clipped = false, near = false;
  };
  const std::size_t nn = cfg.ns.size();
  // one job per (env, n) so that a single large n does not serialize the run
  auto jobs = parallel_map<EnvJob>(cfg.envs * nn, threads, [&](std::size_t idx) {
    const std::size_t e = idx / nn, k = idx % nn;
    const Environment env = suite_environment(ec, seed, e);
    const auto rec = m_n(env, cfg.ns[k], cfg.xi0, cfg.grid);
    BrwConfig bc = cfg.brw;
    bc.n = cfg.ns[k];
    const BrwSimulator sim(env, bc);
    EnvJob job;
    job.m = {rec.m_n};
    job.centered.resize(1);
    const std::uint64_t base = derive_key("tight", seed, e * 1000003ULL + cfg.ns[k]);
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
      const auto out = sim.run(replica_key(base, r));
      job.centered[0].push_back(out.max - rec.m_n);
      job.substituted += out.diag.substituted;
      job.clipped = job.clipped || out.diag.table_clipped;
      job.near = job.near || out.diag.front_near_threshold;
    }
    return job;
  });

  TightnessReport rep;
  rep.centered.assign(nn, {});
  rep.m_n.assign(cfg.envs, std::vector<double>(nn));
  for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
    const std::size_t e = idx / nn, k = idx % nn;
    auto& j = jobs[idx];
    rep.m_n[e][k] = j.m[0];
    rep.centered[k].insert(rep.centered[k].end(), j.centered[0].begin(), j.centered[0].end());
    rep.substituted += j.substituted;
    rep.table_clipped = rep.table_clipped || j.clipped;
    rep.front_near_threshold = rep.front_near_threshold || j.near;
  }
  for (std::size_t k = 0; k < nn; ++k) {
    std::vector<double> v = rep.centered[k];
    std::sort(v.begin(), v.end());
    TightnessRow row;
    row.n = cfg.ns[k];
    row.samples = v.size();
    row.q01 = quantile_sorted(v, 0.01);
    row.q05 = quantile_sorted(v, 0.05);
    row.q25 = quantile_sorted(v, 0.25);
    row.q50 = quantile_sorted(v, 0.50);
    row.q75 = quantile_sorted(v, 0.75);
    row.q95 = quantile_sorted(v, 0.95);
    row.q99 = quantile_sorted(v, 0.99);
    row.iqr = row.q75 - row.q25;
    row.spread = row.q95 - row.q05;
    rep.rows.push_back(row);
  }
  return rep;
}

CheckResult tightness_check(const TightnessReport& r, double iqr_factor, double spread_factor) {
  if (r.rows.size() < 2) throw ConfigError("tightness check needs at least two ladder points");
  auto lo = std::min_element(r.rows.begin(), r.rows.end(),
                             [](const auto& a, const auto& b) { return a.n < b.n; });
  auto hi = std::max_element(r.rows.begin(), r.rows.end(),
                             [](const auto& a, const auto& b) { return a.n < b.n; });
  CheckResult c;
  c.name = "tightness";
  const double iqr_ratio = hi->iqr / lo->iqr;
  const double spread_ratio = hi->spread / lo->spread;
  c.value = iqr_ratio;
  c.reference = iqr_factor;
  c.margin = std::min(iqr_factor - iqr_ratio, spread_factor - spread_ratio);
  c.pass = iqr_ratio <= iqr_factor && spread_ratio <= spread_factor && !r.table_clipped;
  c.metrics = {{"n_small", double(lo->n)},  {"n_large", double(hi->n)},
               {"iqr_small", lo->iqr},      {"iqr_large", hi->iqr},
               {"spread_small", lo->spread}, {"spread_large", hi->spread},
               {"spread_ratio", spread_ratio}, {"median_large", hi->q50},
               {"table_clipped", r.table_clipped ? 1.0 : 0.0}};
  c.note = "iqr ratio " + fmt(iqr_ratio) + ", spread ratio " + fmt(spread_ratio);
  return c;
}

}  // namespace brwre
