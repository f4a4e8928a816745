#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "brwre/barrier.hpp"
#include "brwre/env.hpp"
#include "brwre/maxlaw.hpp"

namespace brwre {

enum class BrwMode {
  Exact,   // every particle is kept
  Pruned,  // particles below K_k/theta* - window are replaced by a draw of
           // their subtree maximum from the quenched max-law table
};

struct BrwConfig {
  std::size_t n = 16;
  BrwMode mode = BrwMode::Exact;
  double window = 8.0;
  std::size_t max_particles = 2'000'000;
  double table_dx = 0.02;
};

struct BrwDiagnostics {
  std::size_t peak_particles = 0;
  std::size_t pruned = 0;
  // Pruned particles whose subtree maximum was drawn from the table.
  std::size_t substituted = 0;
  // A table draw fell outside the tabulated range; the sample is then biased.
  bool table_clipped = false;
  // The running maximum came within window/2 of the prune threshold.
  bool front_near_threshold = false;
};

struct MaxSample {
  double value = 0.0;
  BrwDiagnostics diag;
};

struct CountSample {
  std::size_t count = 0;
  // Pruned particles might still have contributed, so count is a lower bound.
  bool lower_bound = false;
  BrwDiagnostics diag;
};

// Path functional f(x_1, ..., x_n) applied to x_j = V(u_j) - K_j/theta*.
struct PathFunctional {
  enum class Kind { Constant, ExpLast, BarrierIndicator, LogisticLast };
  Kind kind = Kind::Constant;
  double c = 1.0;       // Constant value
  double a = 0.0;       // ExpLast: exp(a x_n)
  double center = 0.0;  // LogisticLast: amp / (1 + exp(-(x_n - center)/scale))
  double scale = 1.0;
  double amp = 1.0;
  BarrierSpec spec;     // BarrierIndicator: 1{y + x_j + f(j) <= 0 for all j, end window}

  static PathFunctional constant(double c);
  static PathFunctional exp_last(double a);
  static PathFunctional barrier_indicator(const BarrierSpec& spec);
  static PathFunctional logistic_last(double center, double scale, double amp);

  // Whether x_j satisfies the barrier at integer time j (BarrierIndicator).
  bool step_ok(std::size_t j, double xj) const;
  double terminal(double xn, bool path_ok) const;
};

struct ReplicaObservers {
  std::optional<BarrierSpec> z_spec;      // count Z_n for this discrete spec
  std::optional<double> breach_y;         // event V(u) + y > K_|u|/theta*
  std::optional<PathFunctional> functional;  // sum over generation n
};

struct ReplicaOutcome {
  double max = 0.0;
  std::size_t z_count = 0;
  bool z_lower_bound = false;
  bool breach = false;
  // max over generations 1..n of V(u) - K_|u|/theta*, over kept and pruned particles
  double max_excess = -INFINITY;
  double functional_sum = 0.0;
  BrwDiagnostics diag;
};

class BrwSimulator {
 public:
  BrwSimulator(const Environment& env, BrwConfig cfg);
  const BrwConfig& config() const { return cfg_; }
  const Environment& env() const { return env_; }
  // One replica; all randomness keyed by `key` and particle labels.
  ReplicaOutcome run(std::uint64_t key, const ReplicaObservers& obs = {}) const;
  const MaxLawTable* table() const { return table_.get(); }

 private:
  Environment env_;
  BrwConfig cfg_;
  std::shared_ptr<const MaxLawTable> table_;
};

std::uint64_t replica_key(std::uint64_t seed, std::uint64_t replica);

MaxSample simulate_max(const Environment& env, const BrwConfig& cfg, std::uint64_t seed);
// Z_n(y) for a discrete-monitoring spec (typically p_smile_spec).
CountSample count_below_barrier(const Environment& env, const BarrierSpec& spec,
                                const BrwConfig& cfg, std::uint64_t seed);

struct MeanResult {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t reps = 0;
};

// E[sum_{|u|=n} f(V(u_j) - K_j/theta*)] by exact simulation.
MeanResult many_to_one_lhs(const Environment& env, std::size_t n, const PathFunctional& f,
                           std::size_t reps, std::uint64_t seed, int threads = 1);
// E[exp(-theta* T_n) f(T)], T_k = S_k - K_k/theta*, S with N(theta*, 1) steps.
MeanResult many_to_one_rhs(const Environment& env, std::size_t n, const PathFunctional& f,
                           std::size_t reps, std::uint64_t seed, int threads = 1);
// Closed form of the right-hand side for Constant and ExpLast.
std::optional<double> many_to_one_rhs_exact(const Environment& env, std::size_t n,
                                            const PathFunctional& f);
// E[w^2] of the right-hand side weight, same cases.
std::optional<double> many_to_one_rhs_second_moment(const Environment& env, std::size_t n,
                                                    const PathFunctional& f);

struct BreachResult {
  double estimate = 0.0;
  double stderr_ = 0.0;
  double bound = 0.0;
  std::size_t reps = 0;
};
BreachResult breach_probability(const Environment& env, double y, std::size_t n,
                                std::size_t reps, std::uint64_t seed, int threads = 1);
// Several levels from the same replicas.
std::vector<BreachResult> breach_probabilities(const Environment& env, const std::vector<double>& ys,
                                               std::size_t n, std::size_t reps, std::uint64_t seed,
                                               int threads = 1);

}  // namespace brwre
