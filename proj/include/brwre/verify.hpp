#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "brwre/barrier.hpp"
#include "brwre/brw.hpp"
#include "brwre/env.hpp"

namespace brwre {

struct CheckResult {
  std::string name;
  bool pass = false;
  bool inconclusive = false;
  double value = 0.0;
  double reference = 0.0;
  double stderr_ = 0.0;
  double margin = 0.0;  // positive when the check holds with room to spare
  bool advisory = false;  // reported, but a failure does not fail the criterion
  std::vector<std::pair<std::string, double>> metrics;
  std::string note;
};

// Environment e of a suite drawn from cfg under seed.
Environment suite_environment(const EnvConfig& cfg, std::uint64_t seed, std::size_t e);

// ---- bridge crossing --------------------------------------------------------

struct BridgeOracle {
  double estimate = 0.0;  // Richardson combination of the three monitoring levels
  double stderr_ = 0.0;
  double raw_fine = 0.0;  // survival seen at spacing dt
  double raw_mid = 0.0;   // at 4 dt
  double raw_coarse = 0.0;  // at 16 dt
  std::size_t paths = 0;
};

// Brownian bridges from a to b over time sigma2, monitored every dt, 4dt and
// 16dt on the same paths. Discrete monitoring misses crossings with an error
// expanding in powers of sqrt(dt); the weights (8, -6, 1)/3 cancel the first
// two orders.
BridgeOracle bridge_mc_oracle(double a, double b, double sigma2, std::size_t paths, double dt,
                              std::uint64_t seed, int threads = 1);
CheckResult bridge_formula_check(double a, double b, double sigma2, std::size_t paths, double dt,
                                 std::uint64_t seed, int threads = 1);

// ---- engine vs simulation ---------------------------------------------------

BarrierSpec random_barrier_spec(const Environment& env, std::uint64_t seed, std::size_t index);
CheckResult engine_vs_mc_check(const Environment& env, const BarrierSpec& spec, const GridConfig& grid,
                               std::size_t paths, std::uint64_t seed, int threads = 1,
                               double rel_tol = 0.02);

// ---- many-to-one, breach ----------------------------------------------------

PathFunctional random_functional(const Environment& env, std::size_t n, std::uint64_t seed,
                                 std::size_t index);
CheckResult many_to_one_check(const Environment& env, std::size_t n, const PathFunctional& f,
                              std::size_t reps, std::uint64_t seed, int threads = 1);
CheckResult breach_check(const Environment& env, double y, std::size_t n, std::size_t reps,
                         std::uint64_t seed, int threads = 1);
std::vector<CheckResult> breach_checks(const Environment& env, const std::vector<double>& ys,
                                       std::size_t n, std::size_t reps, std::uint64_t seed,
                                       int threads = 1);

// ---- Girsanov tilt ----------------------------------------------------------

struct TiltReport {
  double ratio_mc = 0.0;
  double ratio_stderr = 0.0;
  double ratio_engine = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t hits_base = 0;
  std::size_t hits_tilted = 0;
  CheckResult check;
};

// P_y[y + B_s + cs + h(s) - W_s <= 0 on [0,t], end in J_{y0}] over the same
// event with c = 0, against exp(-tc^2/2 - yc - h_t(t)c + W_t c +/- |y0-1||c|).
TiltReport girsanov_tilt_check(const Environment& env, double t, const Curve& h, double c,
                               double y, double y0, std::size_t paths, std::uint64_t seed,
                               const GridConfig& grid, int threads = 1);

// ---- association on Brownian bridges ----------------------------------------

struct AssociationReport {
  double p_a = 0.0;
  double p_b = 0.0;
  double p_ab = 0.0;
  double excess = 0.0;         // p_ab - p_a p_b
  double excess_stderr = 0.0;
  double worst_cov_z = 0.0;    // max |sample cov - t_j(t - t_k)/t| / stderr
  CheckResult check;
};

// Bridge from 0 at time 0 to x_end at time t, observed at `times`. Event A
// uses the times with in_a = true, B the rest; each is {X_{t_j} <= thr_j}.
AssociationReport association_check(double t, double x_end, const std::vector<double>& times,
                                    const std::vector<double>& thresholds,
                                    const std::vector<bool>& in_a, std::size_t reps,
                                    std::uint64_t seed, int threads = 1);
// First half of the times against the second half.
AssociationReport association_check(double t, double x_end, const std::vector<double>& times,
                                    const std::vector<double>& thresholds, std::size_t reps,
                                    std::uint64_t seed, int threads = 1);

// ---- crude lower bound ------------------------------------------------------

struct GCurve {
  double t = 0.0;
  int k1 = 0;
  double t1 = 0.0;
  double t2 = 0.0;
  std::vector<double> xi;     // Xi_0 .. Xi_{k1}
  std::vector<double> delta;  // Delta_0 .. Delta_{k1-1}
  std::vector<double> knots;  // breakpoints of g
  std::vector<double> values;
  double w_t = 0.0;
  double h_t = 0.0;
  double operator()(double s) const;
};

GCurve crude_lb_construct_g(const Environment& env, const Curve& h, double t);

struct CrudeLbReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double below_g = 0.0;  // P[stay below g_t, end window]
  double exponent = 0.0;
  double dominance_gap = 0.0;  // max over a dense grid of g - (W - h)
  CheckResult check;
};

double crude_lb_exponent(const GCurve& g, double y, double y0);
// max of g_t - (W - h_t) over 10^4 + 1 equispaced points and the knots.
double crude_lb_domination_gap(const Environment& env, const Curve& h, const GCurve& g);
CrudeLbReport crude_lb_check(const Environment& env, const Curve& h, double t, double y, double y0,
                             double gamma0, const GridConfig& grid);

struct Gamma0Calibration {
  double gamma0 = 0.0;
  double slope = 0.0;
  std::vector<double> ts;
  std::vector<double> lhs;
};
// Deterministic environment, h = 0, y = y0 = -1: the smallest exponent that
// dominates every ladder point and the fitted decay.
Gamma0Calibration calibrate_gamma0(const std::vector<double>& ts, const GridConfig& grid);

// ---- quenched wall exponent -------------------------------------------------

enum class GammaWindow { QuenchedWall, Unrestricted };

struct GammaCurve {
  std::vector<double> s;
  std::vector<double> log_q;
  double slope_estimate = 0.0;  // -d log q / d log s
  double sup_estimate = 0.0;    // max_s -log q / log s
};

struct GammaReport {
  double gamma_estimate = 0.0;  // median over environments of sup_estimate
  double gamma_slope = 0.0;     // median over environments of slope_estimate
  std::vector<GammaCurve> curves;
};

GammaCurve gamma_curve(const Environment& env, const Curve& h, double t, const std::vector<double>& s_ladder,
                       GammaWindow window, const GridConfig& grid);
GammaReport gamma_hat(const EnvConfig& cfg, const Curve& h, const std::vector<double>& s_ladder,
                      std::size_t envs, std::uint64_t seed, GammaWindow window, const GridConfig& grid,
                      int threads = 1);

// ---- start-point shift ------------------------------------------------------

struct RatioReport {
  double p_x = 0.0;
  double p_x_free = 0.0;  // barrier only on [y^2, t]
  double p_y_free = 0.0;
  double ratio_windowed = 0.0;  // p(x, y^2) / p(x)
  double ratio_first = 0.0;     // p(y, y^2) / p(x, y^2)
  double first_lower = 0.0;     // c e^{-2 C1} e^{-C_log sqrt(log y^2)}
  double log_upper_windowed = 0.0;  // log(C2^{-1} |y|^{2 gamma})
  double log_upper_first = 0.0;     // log of the explicit part of the upper bound
  CheckResult check;
};

RatioReport ratio_start_shift(const Environment& env, double t, const Curve& h, double x, double y,
                              double y0, double c_const, double gamma, const GridConfig& grid);

// ---- p_n growth ---------------------------------------------------------------

struct GrowthCurve {
  std::vector<std::size_t> n;
  std::vector<double> ratio;       // |log p_n| / log n
  std::vector<double> running_max;
  double growth = 0.0;             // relative growth of the running max over the last decade
};

GrowthCurve log_pn_growth(const Environment& env, const std::vector<std::size_t>& ns, double xi0,
                          const GridConfig& grid);
CheckResult log_pn_growth_check(const std::vector<GrowthCurve>& curves, double limit = 0.10);

// ---- tightness ----------------------------------------------------------------

struct TightnessRow {
  std::size_t n = 0;
  double q01 = 0, q05 = 0, q25 = 0, q50 = 0, q75 = 0, q95 = 0, q99 = 0;
  double iqr = 0, spread = 0;
  std::size_t samples = 0;
};

struct TightnessConfig {
  EnvConfig env;  // length is raised to the largest n when shorter
  std::size_t envs = 30;
  std::size_t replicas = 200;
  std::vector<std::size_t> ns{32, 64, 128};
  BrwConfig brw;  // n is set per run
  double xi0 = -4.0;
  GridConfig grid;
};

struct TightnessReport {
  std::vector<TightnessRow> rows;
  std::vector<std::vector<double>> centered;  // per n, all envs and replicas
  std::vector<std::vector<double>> m_n;       // per env, per n
  std::size_t substituted = 0;
  bool table_clipped = false;
  bool front_near_threshold = false;
};

TightnessReport tightness_experiment(const TightnessConfig& cfg, std::uint64_t seed, int threads = 1);
// IQR and 5-95 spread at the largest n against the smallest, with a clean
// table sentinel.
CheckResult tightness_check(const TightnessReport& r, double iqr_factor = 1.5,
                            double spread_factor = 2.0);

}  // namespace brwre
