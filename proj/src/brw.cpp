#include "brwre/brw.hpp"

#include <algorithm>
#include <cmath>

#include "brwre/errors.hpp"
#include "brwre/parallel.hpp"
#include "brwre/rng.hpp"
#include "brwre/stats.hpp"

namespace brwre {

PathFunctional PathFunctional::constant(double c) {
  PathFunctional f;
  f.kind = Kind::Constant;
  f.c = c;
  return f;
}

PathFunctional PathFunctional::exp_last(double a) {
  PathFunctional f;
  f.kind = Kind::ExpLast;
  f.a = a;
  return f;
}

PathFunctional PathFunctional::barrier_indicator(const BarrierSpec& spec) {
  PathFunctional f;
  f.kind = Kind::BarrierIndicator;
  f.spec = spec;
  return f;
}

PathFunctional PathFunctional::logistic_last(double center, double scale, double amp) {
  if (!(scale > 0.0)) throw ConfigError("logistic scale must be positive");
  PathFunctional f;
  f.kind = Kind::LogisticLast;
  f.center = center;
  f.scale = scale;
  f.amp = amp;
  return f;
}

namespace {

bool spec_step_ok(const BarrierSpec& s, std::size_t j, double xj) {
  return s.start_offset + xj + s.f(static_cast<double>(j)) <= 0.0;
}

bool spec_end_ok(const BarrierSpec& s, std::size_t n, double xn) {
  if (s.end.unrestricted) return true;
  const double y = s.start_offset + xn + s.f(static_cast<double>(n));
  return y >= s.end.lo && y <= s.end.hi;
}

}  // namespace

bool PathFunctional::step_ok(std::size_t j, double xj) const {
  return kind != Kind::BarrierIndicator || spec_step_ok(spec, j, xj);
}

double PathFunctional::terminal(double xn, bool path_ok) const {
  switch (kind) {
    case Kind::Constant: return c;
    case Kind::ExpLast: return std::exp(a * xn);
    case Kind::LogisticLast: return amp / (1.0 + std::exp(-(xn - center) / scale));
    case Kind::BarrierIndicator:
      return (path_ok && spec_end_ok(spec, static_cast<std::size_t>(std::llround(spec.t)), xn)) ? 1.0 : 0.0;
  }
  return 0.0;
}

std::uint64_t replica_key(std::uint64_t seed, std::uint64_t replica) {
  return derive_key("brw", seed, replica);
}

BrwSimulator::BrwSimulator(const Environment& env, BrwConfig cfg) : env_(env), cfg_(cfg) {
  if (cfg_.n == 0) throw ConfigError("BRW horizon must be >= 1");
  if (cfg_.n > env_.length()) throw RangeError("BRW horizon exceeds environment length");
  if (cfg_.max_particles == 0) throw ConfigError("particle cap must be positive");
  if (cfg_.mode == BrwMode::Pruned) {
    if (!(cfg_.window > 0.0)) throw ConfigError("prune window must be positive");
    table_ = std::make_shared<MaxLawTable>(env_, cfg_.n, cfg_.table_dx);
  }
}

namespace {

struct Particle {
  double v;
  std::uint64_t label;
  bool z_ok;
  bool f_ok;
};

}  // namespace

ReplicaOutcome BrwSimulator::run(std::uint64_t key, const ReplicaObservers& obs) const {
  const bool pruned = cfg_.mode == BrwMode::Pruned;
  if (pruned && obs.functional) throw StateError("path functionals need exact simulation");
  if (obs.z_spec) {
    if (obs.z_spec->monitoring != Monitoring::Discrete)
      throw ConfigError("Z_n counts use integer-time barriers");
    if (std::llround(obs.z_spec->t) != static_cast<long long>(cfg_.n))
      throw ConfigError("Z_n spec horizon must equal the BRW horizon");
  }
  const Stream gauss(hash_combine(key, fnv1a64("gauss")));
  const Stream sub(hash_combine(key, fnv1a64("subtree")));
  const double th = env_.theta_star();

  ReplicaOutcome out;
  std::vector<Particle> cur{{0.0, 1, true, true}};
  if (obs.z_spec) cur[0].z_ok = spec_step_ok(*obs.z_spec, 0, 0.0);
  if (obs.functional) cur[0].f_ok = obs.functional->step_ok(0, 0.0);
  double best_sub = -INFINITY;
  std::vector<Particle> next;
  out.diag.peak_particles = 1;

  for (std::size_t k = 1; k <= cfg_.n && !cur.empty(); ++k) {
    const int l = env_.l(k);
    const double line = env_.big_k(k) / th;
    const double thresh = line - cfg_.window;
    next.clear();
    double front = -INFINITY;
    for (const Particle& p : cur) {
      for (int c = 0; c < l; ++c) {
        Particle q;
        q.label = hash_combine(p.label, static_cast<std::uint64_t>(c));
        q.v = p.v + gauss.normal(k, q.label);
        const double x = q.v - line;
        q.z_ok = p.z_ok && (!obs.z_spec || spec_step_ok(*obs.z_spec, k, x));
        q.f_ok = p.f_ok && (!obs.functional || obs.functional->step_ok(k, x));
        out.max_excess = std::max(out.max_excess, x);
        if (obs.breach_y && q.v + *obs.breach_y > line) out.breach = true;
        if (pruned && k < cfg_.n && q.v < thresh) {
          ++out.diag.pruned;
          ++out.diag.substituted;
          bool clipped = false;
          const double m = q.v + table_->quantile(k, sub.uniform(k, q.label), &clipped);
          if (clipped) out.diag.table_clipped = true;
          best_sub = std::max(best_sub, m);
          if (q.z_ok && obs.z_spec) out.z_lower_bound = true;
          continue;
        }
        front = std::max(front, q.v);
        next.push_back(q);
      }
      if (next.size() > cfg_.max_particles)
        throw ResourceError("particle cap exceeded at generation " + std::to_string(k) +
                            "; use pruned mode or raise max_particles");
    }
    if (pruned && k < cfg_.n && front < thresh + 0.5 * cfg_.window) out.diag.front_near_threshold = true;
    out.diag.peak_particles = std::max(out.diag.peak_particles, next.size());
    std::swap(cur, next);
  }

  double m = best_sub;
  const double line_n = env_.big_k(cfg_.n) / th;
  CompensatedSum fsum;
  for (const Particle& p : cur) {
    m = std::max(m, p.v);
    const double x = p.v - line_n;
    if (obs.z_spec && p.z_ok && spec_end_ok(*obs.z_spec, cfg_.n, x)) ++out.z_count;
    if (obs.functional) fsum.add(obs.functional->terminal(x, p.f_ok));
  }
  out.max = m;
  out.functional_sum = fsum.value();
  return out;
}

MaxSample simulate_max(const Environment& env, const BrwConfig& cfg, std::uint64_t seed) {
  BrwSimulator sim(env, cfg);
  const auto r = sim.run(replica_key(seed, 0));
  return {r.max, r.diag};
}

CountSample count_below_barrier(const Environment& env, const BarrierSpec& spec,
                                const BrwConfig& cfg, std::uint64_t seed) {
  BrwSimulator sim(env, cfg);
  ReplicaObservers obs;
  obs.z_spec = spec;
  const auto r = sim.run(replica_key(seed, 0), obs);
  return {r.z_count, r.z_lower_bound, r.diag};
}

namespace {

MeanResult summarize(const std::vector<MomentAccumulator>& parts) {
  MomentAccumulator all;
  for (const auto& p : parts) all.merge(p);
  const auto e = all.estimate();
  return {e.mean, e.stderr_, e.n};
}

constexpr std::size_t kChunk = 256;

}  // namespace

MeanResult many_to_one_lhs(const Environment& env, std::size_t n, const PathFunctional& f,
                           std::size_t reps, std::uint64_t seed, int threads) {
  if (reps == 0) throw ConfigError("need at least one replica");
  BrwConfig cfg;
  cfg.n = n;
  BrwSimulator sim(env, cfg);
  ReplicaObservers obs;
  obs.functional = f;
  const std::size_t chunks = (reps + kChunk - 1) / kChunk;
  auto parts = parallel_map<MomentAccumulator>(chunks, threads, [&](std::size_t c) {
    MomentAccumulator acc;
    for (std::size_t r = c * kChunk; r < std::min(reps, (c + 1) * kChunk); ++r)
      acc.add(sim.run(derive_key("m2o-lhs", seed, r), obs).functional_sum);
    return acc;
  });
  return summarize(parts);
}

MeanResult many_to_one_rhs(const Environment& env, std::size_t n, const PathFunctional& f,
                           std::size_t reps, std::uint64_t seed, int threads) {
  if (reps == 0) throw ConfigError("need at least one path");
  if (n > env.length()) throw RangeError("many-to-one horizon exceeds environment length");
  const double th = env.theta_star();
  const std::uint64_t key = derive_key("m2o-rhs", seed);
  const std::size_t chunk = 4096;
  const std::size_t chunks = (reps + chunk - 1) / chunk;
  auto parts = parallel_map<MomentAccumulator>(chunks, threads, [&](std::size_t c) {
    MomentAccumulator acc;
    for (std::size_t p = c * chunk; p < std::min(reps, (c + 1) * chunk); ++p) {
      Sequence rng(key, p);
      double s = 0.0;
      bool ok = f.step_ok(0, 0.0);
      for (std::size_t k = 1; k <= n; ++k) {
        s += th + rng.normal();
        ok = ok && f.step_ok(k, s - env.big_k(k) / th);
      }
      const double tn = s - env.big_k(n) / th;
      acc.add(std::exp(-th * tn) * f.terminal(tn, ok));
    }
    return acc;
  });
  return summarize(parts);
}

std::optional<double> many_to_one_rhs_second_moment(const Environment& env, std::size_t n,
                                                    const PathFunctional& f) {
  const double th = env.theta_star();
  const double nn = static_cast<double>(n);
  const double mu = nn * th - env.big_k(n) / th;
  switch (f.kind) {
    case PathFunctional::Kind::Constant:
      return f.c * f.c * std::exp(-2.0 * th * mu + 2.0 * th * th * nn);
    case PathFunctional::Kind::ExpLast: {
      const double b = f.a - th;
      return std::exp(2.0 * b * mu + 2.0 * b * b * nn);
    }
    default:
      return std::nullopt;
  }
}

std::optional<double> many_to_one_rhs_exact(const Environment& env, std::size_t n,
                                            const PathFunctional& f) {
  const double th = env.theta_star();
  const double nn = static_cast<double>(n);
  // T_n ~ N(n theta* - K_n/theta*, n).
  const double mu = nn * th - env.big_k(n) / th;
  switch (f.kind) {
    case PathFunctional::Kind::Constant:
      return f.c * std::exp(-th * mu + 0.5 * th * th * nn);
    case PathFunctional::Kind::ExpLast: {
      const double b = f.a - th;
      return std::exp(b * mu + 0.5 * b * b * nn);
    }
    default:
      return std::nullopt;
  }
}

std::vector<BreachResult> breach_probabilities(const Environment& env, const std::vector<double>& ys,
                                               std::size_t n, std::size_t reps, std::uint64_t seed,
                                               int threads) {
  for (double y : ys)
    if (!(y < 0.0)) throw ConfigError("breach level y must be negative");
  if (reps == 0) throw ConfigError("need at least one replica");
  BrwConfig cfg;
  cfg.n = n;
  BrwSimulator sim(env, cfg);
  const std::size_t chunks = (reps + kChunk - 1) / kChunk;
  auto parts = parallel_map<std::vector<MomentAccumulator>>(chunks, threads, [&](std::size_t c) {
    std::vector<MomentAccumulator> acc(ys.size());
    for (std::size_t r = c * kChunk; r < std::min(reps, (c + 1) * kChunk); ++r) {
      const double ex = sim.run(derive_key("breach", seed, r)).max_excess;
      for (std::size_t i = 0; i < ys.size(); ++i) acc[i].add(ex + ys[i] > 0.0 ? 1.0 : 0.0);
    }
    return acc;
  });
  std::vector<BreachResult> out;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    std::vector<MomentAccumulator> col;
    for (const auto& p : parts) col.push_back(p[i]);
    const auto m = summarize(col);
    BreachResult b;
    b.estimate = m.estimate;
    b.stderr_ = m.stderr_;
    b.reps = m.reps;
    b.bound = std::exp(env.theta_star() * ys[i]);
    out.push_back(b);
  }
  return out;
}

BreachResult breach_probability(const Environment& env, double y, std::size_t n,
                                std::size_t reps, std::uint64_t seed, int threads) {
  return breach_probabilities(env, {y}, n, reps, seed, threads).front();
}

}  // namespace brwre
