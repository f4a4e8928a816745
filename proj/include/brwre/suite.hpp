#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "brwre/verify.hpp"

namespace brwre {

struct SuiteConfig {
  GridConfig grid;
  double xi0 = -4.0;
  OffspringLaw suite_law = OffspringLaw::uniform_int(2, 3);

  double bridge_a = -1.0, bridge_b = -1.0, bridge_sigma2 = 1.0;
  std::size_t bridge_paths = 1'000'000;
  double bridge_dt = 1e-3;

  std::size_t mc_specs = 10, mc_paths = 100'000;
  double mc_rel_tol = 0.02;

  std::size_t m2o_n = 6, m2o_reps = 10'000, m2o_random = 5;

  std::vector<double> breach_levels{-1.0, -2.0, -3.0};
  std::size_t breach_n = 12, breach_reps = 10'000;

  std::vector<double> tilt_t{16.0, 64.0};
  std::vector<double> tilt_c{0.05, -0.05, 0.2, -0.2};
  double tilt_y = -2.0, tilt_y0 = -2.0;
  std::size_t tilt_paths = 100'000;

  std::size_t assoc_reps = 1'000'000;

  std::vector<double> crude_domination_t{16.0, 64.0, 256.0};
  double crude_t = 64.0;
  std::size_t crude_envs = 50;
  double crude_y = -1.0, crude_y0 = -1.0;
  double crude_pass_rate = 0.95;
  double gamma0 = 0.0;  // <= 0: calibrate on the ladder below
  std::vector<double> gamma0_ladder{16, 32, 64, 128, 256, 512, 1024};

  std::size_t growth_envs = 10;
  std::vector<std::size_t> growth_ns{16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  double growth_limit = 0.10;

  std::vector<OffspringLaw> tight_laws{OffspringLaw::deterministic(2), OffspringLaw::uniform_int(2, 3)};
  std::size_t tight_envs = 30, tight_reps = 200;
  std::vector<std::size_t> tight_ns{32, 64, 128};
  BrwConfig tight_brw{16, BrwMode::Pruned, 6.0, 2'000'000, 0.02};
  double tight_iqr_factor = 1.5, tight_spread_factor = 2.0;

  double ratio_t = 256.0;
  std::vector<double> ratio_y{-3.0, -4.0};
  std::vector<double> ratio_x{-1.0, -2.0};
  double ratio_y0 = -4.0;
  std::size_t ratio_envs = 4;  // random ones, after the deterministic environment
  double ratio_c = 0.6065306597126334;
  std::vector<double> gamma_ladder{2, 4, 8, 16, 32, 64, 128};

  std::set<int> only;  // criteria to run; empty runs all
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string summary;
  std::vector<CheckResult> checks;
  double seconds = 0.0;  // wall time; not part of deterministic output
};

using SuiteProgress = std::function<void(const CriterionResult&)>;

std::vector<CriterionResult> run_suite(const SuiteConfig& cfg, std::uint64_t seed, int threads,
                                       const SuiteProgress& progress = {});

}  // namespace brwre
