#include "brwre/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "brwre/errors.hpp"
#include "brwre/parallel.hpp"
#include "brwre/rng.hpp"
#include "brwre/stats.hpp"

namespace brwre {

double bridge_below_zero_prob(double a, double b, double sigma2) {
  if (!(sigma2 > 0.0)) throw DomainError("bridge_below_zero_prob: sigma^2 must be positive");
  if (a >= 0.0 || b >= 0.0) return 0.0;
  return -std::expm1(-2.0 * a * b / sigma2);
}

namespace {

constexpr double kTimeEps = 1e-9;

bool is_integer_time(double s) { return std::fabs(s - std::round(s)) < kTimeEps; }

void push_time(std::vector<double>& ts, double s) {
  if (ts.empty() || s > ts.back() + kTimeEps) ts.push_back(s);
}

void check_spec(const Environment& env, const BarrierSpec& spec) {
  if (!(spec.t > spec.t_start)) throw ConfigError("barrier spec needs t > t_start");
  if (spec.t_start < 0.0) throw ConfigError("barrier spec needs t_start >= 0");
  if (spec.t > static_cast<double>(env.length()) + kTimeEps)
    throw RangeError("barrier horizon exceeds environment length");
  const double fu = spec.free_until.value_or(spec.t_start);
  if (fu < spec.t_start - kTimeEps || fu > spec.t + kTimeEps)
    throw ConfigError("free_until must lie in [t_start, t]");
  if (!spec.end.unrestricted && !(spec.end.lo <= spec.end.hi))
    throw ConfigError("end window needs lo <= hi");
}

}  // namespace

BarrierProblem resolve(const Environment& env, const BarrierSpec& spec, int substeps) {
  check_spec(env, spec);
  if (substeps < 1) throw ConfigError("substeps must be >= 1");
  const double a = spec.t_start, t = spec.t;
  const double fu = std::clamp(spec.free_until.value_or(a), a, t);
  const bool discrete = spec.monitoring == Monitoring::Discrete;

  std::vector<double> ts;
  push_time(ts, a);
  push_time(ts, fu);
  std::vector<double> knots;
  for (double k = std::ceil(fu - kTimeEps); k < t - kTimeEps; k += 1.0)
    if (k > fu + kTimeEps) knots.push_back(k);
  knots.push_back(t);
  double prev = fu;
  for (double k : knots) {
    if (!discrete) {
      const double len = k - prev;
      const int pieces = std::max(1, static_cast<int>(std::ceil(len * substeps - kTimeEps)));
      for (int j = 1; j < pieces; ++j) push_time(ts, prev + len * j / pieces);
    }
    push_time(ts, k);
    prev = k;
  }

  BarrierProblem p;
  p.times = ts;
  p.barrier.resize(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) p.barrier[i] = env.w_at(ts[i]) - spec.f(ts[i]);
  p.monitored.assign(ts.size(), 0);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const bool active = ts[i] >= fu - kTimeEps;
    p.monitored[i] = active && (!discrete || is_integer_time(ts[i]));
  }
  p.steps.resize(ts.size() - 1);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const bool active = ts[i] >= fu - kTimeEps;
    if (!active) p.steps[i] = StepMode::Free;
    else if (!discrete) p.steps[i] = StepMode::Continuous;
    else p.steps[i] = p.monitored[i + 1] ? StepMode::Discrete : StepMode::Free;
  }
  p.u0 = spec.start_offset + spec.f(a);
  p.end = spec.end;
  return p;
}

BarrierProblem resolve_levels(const std::vector<double>& times, const std::vector<double>& levels,
                              double x0, Window end, Monitoring monitoring) {
  if (times.size() < 2 || times.size() != levels.size())
    throw ConfigError("resolve_levels: need matching times and levels");
  BarrierProblem p;
  p.times = times;
  p.barrier = levels;
  p.monitored.assign(times.size(), 1);
  p.steps.resize(times.size() - 1);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    if (!(times[i + 1] > times[i])) throw ConfigError("resolve_levels: times must increase");
    p.steps[i] = monitoring == Monitoring::Continuous ? StepMode::Continuous : StepMode::Discrete;
  }
  p.u0 = x0 - levels[0];
  p.end = end;
  return p;
}

double barrier_log_probability(const BarrierProblem& prob, const GridConfig& grid,
                               const StepObserver& observer) {
  if (prob.times.size() < 2) throw ConfigError("barrier problem needs at least one step");
  if (prob.monitored[0] && prob.u0 > 0.0) return -INFINITY;
  DensityGrid g = DensityGrid::point(prob.u0, grid.dx);
  if (observer) observer(prob.times[0], g);
  for (std::size_t i = 0; i + 1 < prob.times.size(); ++i) {
    const double var = prob.times[i + 1] - prob.times[i];
    const double d = -(prob.barrier[i + 1] - prob.barrier[i]);
    g = propagate_step(g, d, var, prob.steps[i], grid.propagation);
    if (prob.steps[i] == StepMode::Free && prob.monitored[i + 1]) g = truncate_at_zero(g);
    if (g.mass.empty()) return -INFINITY;
    if (observer) observer(prob.times[i + 1], g);
  }
  const double m = prob.end.unrestricted ? g.total() : g.window_mass(prob.end.lo, prob.end.hi);
  if (!(m > 0.0)) return -INFINITY;
  const double lp = std::log(m) + g.log_scale;
  if (!grid.log_space && lp < std::log(1e-300))
    throw NumericError("probability below 1e-300; enable log-space propagation");
  return lp;
}

double barrier_log_probability(const Environment& env, const BarrierSpec& spec,
                               const GridConfig& grid) {
  return barrier_log_probability(resolve(env, spec, grid.substeps), grid);
}

double barrier_probability(const Environment& env, const BarrierSpec& spec,
                           const GridConfig& grid) {
  return std::exp(barrier_log_probability(env, spec, grid));
}

RefinedProbability barrier_probability_refined(const Environment& env, const BarrierSpec& spec,
                                               const GridConfig& grid) {
  RefinedProbability r;
  r.value = barrier_probability(env, spec, grid);
  GridConfig fine = grid;
  fine.dx = 0.5 * grid.dx;
  r.value_half_dx = barrier_probability(env, spec, fine);
  r.delta = std::fabs(r.value - r.value_half_dx);
  return r;
}

McEstimate barrier_probability_mc(const BarrierProblem& prob, std::size_t paths,
                                  std::uint64_t seed, int threads) {
  if (paths == 0) throw ConfigError("MC needs at least one path");
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (paths + kChunk - 1) / kChunk;
  const std::uint64_t key = derive_key("barrier-mc", seed);
  const std::size_t steps = prob.steps.size();
  auto hits = parallel_map<std::size_t>(chunks, threads, [&](std::size_t c) {
    std::size_t count = 0;
    const std::size_t lo = c * kChunk, hi = std::min(paths, lo + kChunk);
    for (std::size_t p = lo; p < hi; ++p) {
      Sequence rng(key, p);
      double u = prob.u0;
      if (prob.monitored[0] && u > 0.0) continue;
      bool alive = true;
      for (std::size_t i = 0; i < steps && alive; ++i) {
        const double var = prob.times[i + 1] - prob.times[i];
        const double un = u + std::sqrt(var) * rng.normal() - (prob.barrier[i + 1] - prob.barrier[i]);
        if (prob.steps[i] == StepMode::Continuous) {
          const double kill = un >= 0.0 ? 1.0 : std::exp(-2.0 * u * un / var);
          if (rng.uniform() < kill) alive = false;
        } else if (prob.monitored[i + 1] && un > 0.0) {
          alive = false;
        }
        u = un;
      }
      if (!alive) continue;
      if (prob.end.unrestricted || (u >= prob.end.lo && u <= prob.end.hi)) ++count;
    }
    return count;
  });
  std::size_t total = 0;
  for (std::size_t h : hits) total += h;
  McEstimate e;
  e.paths = paths;
  const double n = static_cast<double>(paths);
  e.estimate = static_cast<double>(total) / n;
  e.stderr_ = std::sqrt(std::max(0.0, e.estimate * (1.0 - e.estimate)) / std::max(1.0, n - 1.0));
  return e;
}

McEstimate barrier_probability_mc(const Environment& env, const BarrierSpec& spec,
                                  const GridConfig& grid, std::size_t paths,
                                  std::uint64_t seed, int threads) {
  return barrier_probability_mc(resolve(env, spec, grid.substeps), paths, seed, threads);
}

BarrierSpec p_n_spec(std::size_t n, double xi0) {
  BarrierSpec s;
  s.t = static_cast<double>(n);
  s.start_offset = xi0;
  s.end = Window::unit_below(xi0);
  return s;
}

std::vector<double> log_p_n_sequence(const Environment& env, const std::vector<std::size_t>& ns,
                                     double xi0, const GridConfig& grid) {
  if (ns.empty()) return {};
  if (xi0 >= 0.0) throw ConfigError("xi0 must be negative");
  const std::size_t n_max = *std::max_element(ns.begin(), ns.end());
  if (n_max == 0) throw ConfigError("p_n needs n >= 1");
  const BarrierProblem prob = resolve(env, p_n_spec(n_max, xi0), grid.substeps);
  std::map<std::size_t, double> found;
  for (std::size_t n : ns) found[n] = -INFINITY;
  barrier_log_probability(prob, grid, [&](double s, const DensityGrid& g) {
    if (!is_integer_time(s)) return;
    const auto n = static_cast<std::size_t>(std::llround(s));
    auto it = found.find(n);
    if (it == found.end()) return;
    const double m = g.window_mass(xi0 - 1.0, xi0);
    it->second = m > 0.0 ? std::log(m) + g.log_scale : -INFINITY;
  });
  std::vector<double> out;
  out.reserve(ns.size());
  for (std::size_t n : ns) {
    const double v = found[n];
    if (!std::isfinite(v)) throw NumericError("p_n vanished on the grid");
    out.push_back(v);
  }
  return out;
}

double log_p_n(const Environment& env, std::size_t n, double xi0, const GridConfig& grid) {
  return log_p_n_sequence(env, {n}, xi0, grid)[0];
}

BarrierSpec p_frown_spec(const Environment& env, std::size_t n, double y, double x,
                         double log_pn, double exponent) {
  BarrierSpec s;
  s.t = static_cast<double>(n);
  s.curve = Curve::neg_banana(exponent, 0.5);
  s.drift_slope = -log_pn / (static_cast<double>(n) * env.theta_star());
  s.start_offset = y;
  s.end = Window::unit_below(x);
  s.monitoring = Monitoring::Discrete;
  return s;
}

BarrierSpec p_smile_spec(const Environment& env, std::size_t n, double y, double xi0,
                         double log_pn, double exponent) {
  BarrierSpec s;
  s.t = static_cast<double>(n);
  s.curve = Curve::pos_banana(exponent, 1.0);
  s.drift_slope = -log_pn / (static_cast<double>(n) * env.theta_star());
  s.start_offset = y;
  s.end = Window::unit_below(xi0);
  s.monitoring = Monitoring::Discrete;
  return s;
}

SplitBounds barrier_split_lower_bounds(const Environment& env, const BarrierSpec& spec,
                                       double t0, double x0, const GridConfig& grid) {
  if (spec.end.unrestricted) throw ConfigError("split needs a bounded end window");
  if (!(t0 > spec.t_start && t0 < spec.t)) throw ConfigError("split time must lie inside (t_start, t)");
  const double z = spec.end.hi;
  BarrierSpec whole = spec;
  whole.end = Window::of(z - 2.0, z);
  whole.curve_horizon = spec.horizon_of_curve();

  BarrierSpec first = spec;
  first.curve_horizon = spec.horizon_of_curve();
  first.t = t0;
  const double ft0 = spec.f(t0);
  first.end = Window::of(x0 - 1.0 + ft0, x0 + ft0);

  BarrierSpec second = spec;
  second.curve_horizon = spec.horizon_of_curve();
  second.t_start = t0;
  second.start_offset = x0;
  second.end = Window::unit_below(z);
  if (spec.free_until && *spec.free_until > t0) second.free_until = spec.free_until;
  else second.free_until.reset();
  if (spec.free_until && *spec.free_until > t0) first.free_until = t0;

  SplitBounds r;
  r.lhs = barrier_probability(env, whole, grid);
  r.factor_first = barrier_probability(env, first, grid);
  r.factor_second = barrier_probability(env, second, grid);
  r.rhs = r.factor_first * r.factor_second;
  r.holds = r.lhs >= r.rhs * (1.0 - 1e-9);
  return r;
}

}  // namespace brwre
