#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "brwre/curve.hpp"
#include "brwre/density.hpp"
#include "brwre/env.hpp"

namespace brwre {

// 1 - exp(-2ab/sigma2) for a, b < 0; 0 when either endpoint is >= 0.
double bridge_below_zero_prob(double a, double b, double sigma2);

struct Window {
  double lo = -1.0;
  double hi = 0.0;
  bool unrestricted = false;

  static Window unit_below(double x) { return {x - 1.0, x, false}; }
  static Window any() { return {0.0, 0.0, true}; }
  static Window of(double lo, double hi) { return {lo, hi, false}; }
};

enum class Monitoring { Continuous, Discrete };

// Event that y + Z_s + f(s) <= 0 for s in [free_until, t] (integers only for
// Discrete) and y + Z_t + f(t) lies in the end window, with Z = B - W on
// [t_start, t] and f(s) = curve_{tau}(s) + drift_slope * s. tau defaults to
// t. For t_start > 0 the process restarts at time t_start from
// start_offset + f(t_start).
struct BarrierSpec {
  double t = 1.0;
  double t_start = 0.0;
  std::optional<double> curve_horizon;
  Curve curve;
  double drift_slope = 0.0;
  double start_offset = -1.0;
  Window end;
  std::optional<double> free_until;
  Monitoring monitoring = Monitoring::Continuous;

  double horizon_of_curve() const { return curve_horizon.value_or(t); }
  double f(double s) const { return curve.value(s, horizon_of_curve()) + drift_slope * s; }
};

struct GridConfig {
  double dx = 0.02;
  int substeps = 1;  // per unit time, continuous monitoring only
  PropagationConfig propagation;
  bool log_space = true;
};

// Barrier-frame description: u = Y - 0 with barrier levels b(s) so that u
// moves by N(0, ds) - (b(s') - b(s)) on each step.
struct BarrierProblem {
  std::vector<double> times;
  std::vector<double> barrier;
  std::vector<StepMode> steps;  // steps[i] covers (times[i], times[i+1]]
  std::vector<char> monitored;  // barrier checked at times[i]
  double u0 = -1.0;
  Window end;
};

BarrierProblem resolve(const Environment& env, const BarrierSpec& spec, int substeps);

// Arbitrary barrier given as an absolute level function, sampled at `times`:
// event X_s <= level(s) with X started at x0; window is on X_t - level(t).
BarrierProblem resolve_levels(const std::vector<double>& times,
                              const std::vector<double>& levels, double x0, Window end,
                              Monitoring monitoring);

using StepObserver = std::function<void(double time, const DensityGrid& g)>;

// log P of the event by killed-density propagation.
double barrier_log_probability(const BarrierProblem& prob, const GridConfig& grid,
                               const StepObserver& observer = {});
double barrier_log_probability(const Environment& env, const BarrierSpec& spec,
                               const GridConfig& grid);
double barrier_probability(const Environment& env, const BarrierSpec& spec,
                           const GridConfig& grid);

struct RefinedProbability {
  double value = 0.0;
  double value_half_dx = 0.0;
  double delta = 0.0;
};
RefinedProbability barrier_probability_refined(const Environment& env, const BarrierSpec& spec,
                                               const GridConfig& grid);

struct McEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t paths = 0;
};

// Direct simulation of the resolved problem: exact Gaussian steps and the
// bridge-crossing kill on continuous steps.
McEstimate barrier_probability_mc(const BarrierProblem& prob, std::size_t paths,
                                  std::uint64_t seed, int threads = 1);
McEstimate barrier_probability_mc(const Environment& env, const BarrierSpec& spec,
                                  const GridConfig& grid, std::size_t paths,
                                  std::uint64_t seed, int threads = 1);

// log p_n for every n in ns from one forward pass; start xi0, window J_{xi0}.
std::vector<double> log_p_n_sequence(const Environment& env, const std::vector<std::size_t>& ns,
                                     double xi0, const GridConfig& grid);
double log_p_n(const Environment& env, std::size_t n, double xi0, const GridConfig& grid);
BarrierSpec p_n_spec(std::size_t n, double xi0);

// Upper-curve event at integer times with f = h/2 - s log(p_n)/(n theta*),
// h = -banana; start y, end window J_x.
BarrierSpec p_frown_spec(const Environment& env, std::size_t n, double y, double x,
                         double log_pn, double exponent = 1.0 / 6.0);
// Lower-curve event at integer times with f = y + h - s log(p_n)/(n theta*),
// h = +banana; end window J_{xi0}.
BarrierSpec p_smile_spec(const Environment& env, std::size_t n, double y, double xi0,
                         double log_pn, double exponent = 1.0 / 6.0);

struct SplitBounds {
  double lhs = 0.0;
  double factor_first = 0.0;
  double factor_second = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// Markov split at t0 through the window J_{x0} + f(t0); lhs uses the end
// window widened to [z - 2, z] where spec.end = J_z.
SplitBounds barrier_split_lower_bounds(const Environment& env, const BarrierSpec& spec,
                                       double t0, double x0, const GridConfig& grid);

}  // namespace brwre
