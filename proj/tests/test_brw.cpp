#include <gtest/gtest.h>

#include <cmath>

#include "brwre/brw.hpp"
#include "brwre/errors.hpp"
#include "brwre/stats.hpp"

using namespace brwre;

TEST(Brw, SameSeedSameMaximum) {
  auto env = sample_environment({OffspringLaw::uniform_int(2, 3), 10}, 1);
  BrwConfig cfg;
  cfg.n = 10;
  EXPECT_EQ(simulate_max(env, cfg, 5).value, simulate_max(env, cfg, 5).value);
  EXPECT_NE(simulate_max(env, cfg, 5).value, simulate_max(env, cfg, 6).value);
}

TEST(Brw, FirstGenerationIsMaxOfNormals) {
  Environment env(OffspringLaw::deterministic(2), {2});
  BrwConfig cfg;
  cfg.n = 1;
  BrwSimulator sim(env, cfg);
  std::vector<double> m;
  for (std::size_t r = 0; r < 5000; ++r) m.push_back(sim.run(replica_key(3, r)).max);
  std::sort(m.begin(), m.end());
  double d = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double f = std::pow(normal_cdf(m[i]), 2);
    d = std::max({d, std::fabs(f - double(i) / m.size()), std::fabs(f - double(i + 1) / m.size())});
  }
  EXPECT_LT(d, 1.628 / std::sqrt(double(m.size())));
}

TEST(Brw, WidePruneWindowReproducesExactReplica) {
  auto env = sample_environment({OffspringLaw::uniform_int(2, 3), 9}, 2);
  BrwConfig ex;
  ex.n = 9;
  BrwConfig pr = ex;
  pr.mode = BrwMode::Pruned;
  pr.window = 1e6;
  BrwSimulator a(env, ex), b(env, pr);
  for (std::size_t r = 0; r < 20; ++r) {
    const auto k = replica_key(11, r);
    EXPECT_EQ(a.run(k).max, b.run(k).max);
  }
}

TEST(Brw, PrunedModeHasTheExactLaw) {
  auto env = sample_environment({OffspringLaw::uniform_int(2, 3), 10}, 3);
  BrwConfig ex;
  ex.n = 10;
  BrwConfig pr = ex;
  pr.mode = BrwMode::Pruned;
  pr.window = 2.0;  // aggressive: most of the tree is substituted
  BrwSimulator a(env, ex), b(env, pr);
  std::vector<double> ma, mb;
  std::size_t substituted = 0;
  for (std::size_t r = 0; r < 2500; ++r) {
    ma.push_back(a.run(replica_key(21, r)).max);
    const auto o = b.run(replica_key(22, r));
    mb.push_back(o.max);
    substituted += o.diag.substituted;
    EXPECT_FALSE(o.diag.table_clipped);
  }
  EXPECT_GT(substituted, 2500u);
  EXPECT_LT(ks_statistic(ma, mb), ks_critical(ma.size(), mb.size(), 0.01));
}

TEST(Brw, PrunedCountIsFlaggedAsLowerBound) {
  auto env = sample_environment({OffspringLaw::deterministic(2), 12}, 1);
  auto spec = p_smile_spec(env, 12, -1.0, -4.0, log_p_n(env, 12, -4.0, {}));
  BrwConfig pr;
  pr.n = 12;
  pr.mode = BrwMode::Pruned;
  pr.window = 0.5;
  bool flagged = false;
  for (std::uint64_t s = 0; s < 20; ++s) flagged |= count_below_barrier(env, spec, pr, s).lower_bound;
  EXPECT_TRUE(flagged);
  BrwConfig ex = pr;
  ex.mode = BrwMode::Exact;
  EXPECT_FALSE(count_below_barrier(env, spec, ex, 0).lower_bound);
}

TEST(Brw, ParticleCapRaises) {
  auto env = sample_environment({OffspringLaw::deterministic(3), 20}, 1);
  BrwConfig cfg;
  cfg.n = 20;
  cfg.max_particles = 1000;
  EXPECT_THROW(simulate_max(env, cfg, 1), ResourceError);
}

TEST(ManyToOne, ConstantCountsParticlesExactly) {
  auto env = sample_environment({OffspringLaw::uniform_int(2, 3), 6}, 7);
  double prod = 1;
  for (std::size_t k = 1; k <= 6; ++k) prod *= env.l(k);
  auto lhs = many_to_one_lhs(env, 6, PathFunctional::constant(1.0), 10, 1);
  EXPECT_DOUBLE_EQ(lhs.estimate, prod);
  EXPECT_NEAR(*many_to_one_rhs_exact(env, 6, PathFunctional::constant(1.0)), prod, 1e-9 * prod);
  auto e = many_to_one_rhs_exact(env, 6, PathFunctional::exp_last(env.theta_star()));
  EXPECT_NEAR(*e, 1.0, 1e-12);
}

TEST(ManyToOne, MonteCarloRhsMatchesClosedForm) {
  auto env = sample_environment({OffspringLaw::uniform_int(2, 3), 6}, 8);
  const auto f = PathFunctional::exp_last(0.7);
  auto mc = many_to_one_rhs(env, 6, f, 200000, 2);
  EXPECT_NEAR(mc.estimate, *many_to_one_rhs_exact(env, 6, f), 4 * mc.stderr_);
}

TEST(ManyToOne, SecondMomentMatchesSample) {
  auto env = sample_environment({OffspringLaw::uniform_int(2, 3), 3}, 4);
  const double th = env.theta_star();
  const auto c = PathFunctional::constant(2.0);
  const double m1 = *many_to_one_rhs_exact(env, 3, c);
  EXPECT_NEAR(*many_to_one_rhs_second_moment(env, 3, c) / (m1 * m1), std::exp(th * th * 3), 1e-9);
  const auto f = PathFunctional::exp_last(th - 0.3);
  const double m2 = *many_to_one_rhs_second_moment(env, 3, f);
  auto mc = many_to_one_rhs(env, 3, f, 400000, 6);
  const double var = mc.stderr_ * mc.stderr_ * 400000.0;
  EXPECT_NEAR(var + mc.estimate * mc.estimate, m2, 0.02 * m2);
  EXPECT_FALSE(many_to_one_rhs_second_moment(env, 3, PathFunctional::logistic_last(0, 1, 1)).has_value());
}

TEST(Breach, BelowExponentialBound) {
  auto env = sample_environment({OffspringLaw::deterministic(2), 12}, 1);
  auto b = breach_probability(env, -2.0, 12, 2000, 3);
  EXPECT_NEAR(b.bound, 0.09491058462925256, 1e-14);
  EXPECT_LE(b.estimate, b.bound + 3 * b.stderr_);
  EXPECT_THROW(breach_probability(env, 0.5, 12, 10, 3), ConfigError);
}
