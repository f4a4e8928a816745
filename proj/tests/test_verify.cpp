#include <gtest/gtest.h>

#include <cmath>

#include "brwre/errors.hpp"
#include "brwre/rng.hpp"
#include "brwre/verify.hpp"

using namespace brwre;

namespace {

Environment det2(std::size_t n) { return sample_environment({OffspringLaw::deterministic(2), n}, 1); }
Environment rand_env(std::size_t n, std::uint64_t seed) {
  return sample_environment({OffspringLaw::uniform_int(2, 3), n}, seed);
}

}  // namespace

TEST(Bridge, ClosedFormFrozen) {
  EXPECT_NEAR(bridge_below_zero_prob(-1.0, -1.0, 1.0), 1.0 - std::exp(-2.0), 1e-15);
  EXPECT_NEAR(bridge_below_zero_prob(-1.0, -1.0, 1.0), 0.8646647167633873, 1e-15);
}

TEST(Bridge, SmallOracleAgreesWithinFiveSe) {
  const auto c = bridge_formula_check(-1.0, -1.0, 1.0, 20000, 1.0 / 256, 3);
  EXPECT_GT(c.stderr_, 0.0);
  EXPECT_LT(std::abs(c.value - c.reference), 5.0 * c.stderr_);
}

TEST(Bridge, RejectsBadGrid) {
  EXPECT_THROW(bridge_mc_oracle(-1, -1, 1.0, 100, 0.3, 1), ConfigError);
  EXPECT_THROW(bridge_mc_oracle(-1, -1, 0.0, 100, 0.01, 1), DomainError);
}

TEST(EngineVsMc, ThreadCountDoesNotChangeResult) {
  const auto env = rand_env(64, 4);
  const auto spec = random_barrier_spec(env, 9, 0);
  const auto a = engine_vs_mc_check(env, spec, {}, 20000, 5, 1);
  const auto b = engine_vs_mc_check(env, spec, {}, 20000, 5, 3);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.stderr_, b.stderr_);
}

TEST(Association, EmptyComplementGivesZeroExcess) {
  const std::vector<double> times{1.0, 2.0, 3.0};
  const std::vector<double> thr{0.5, 0.5, 0.5};
  const std::vector<bool> all{true, true, true};
  const auto r = association_check(4.0, 0.0, times, thr, all, 20000, 7);
  EXPECT_EQ(r.p_b, 1.0);
  EXPECT_DOUBLE_EQ(r.p_ab, r.p_a);
  EXPECT_NEAR(r.excess, 0.0, 1e-12);
  EXPECT_TRUE(r.check.pass);
}

TEST(Association, NestedThresholdsArePositivelyCorrelated) {
  // A: below 0.3 at time 1, B: below 0.3 at time 1.5; strongly dependent
  const auto r = association_check(3.0, 0.0, {1.0, 1.5}, {0.3, 0.3}, {true, false}, 200000, 8);
  EXPECT_GT(r.excess, 5.0 * r.excess_stderr);
  EXPECT_TRUE(r.check.pass);
}

TEST(Association, InfiniteThresholdsGiveZeroExcess) {
  const std::vector<double> times{1.0, 2.0};
  const std::vector<double> thr{INFINITY, INFINITY};
  const auto r = association_check(3.0, 0.0, times, thr, 1000, 2);
  EXPECT_EQ(r.p_a, 1.0);
  EXPECT_EQ(r.p_b, 1.0);
  EXPECT_EQ(r.excess, 0.0);
  EXPECT_TRUE(r.check.pass);
}

TEST(Association, RejectsUnorderedTimes) {
  EXPECT_THROW(association_check(3.0, 0.0, {2.0, 1.0}, {0.0, 0.0}, 100, 1), ConfigError);
}

TEST(CrudeLb, FlatEnvironmentGivesZeroCurve) {
  const auto env = det2(64);
  const auto g = crude_lb_construct_g(env, Curve::zero(), 64.0);
  for (double s = 0.0; s <= 64.0; s += 0.5) EXPECT_NEAR(g(s), 0.0, 1e-12);
}

TEST(CrudeLb, EndpointsAndDomination) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto env = rand_env(64, seed);
    for (const Curve& h : {Curve::zero(), Curve::neg_banana(), Curve::pos_banana()}) {
      const auto g = crude_lb_construct_g(env, h, 64.0);
      EXPECT_NEAR(g(0.0), 0.0, 1e-12);
      EXPECT_NEAR(g(64.0), env.w_at(64.0) - h.value(64.0, 64.0), 1e-12);
      EXPECT_LE(crude_lb_domination_gap(env, h, g), 1e-9);
      EXPECT_EQ(g.k1, static_cast<int>(std::floor(std::log2(64.0 / 3.0))));
    }
  }
}

TEST(CrudeLb, RangeAndCalibrationErrors) {
  const auto env = rand_env(64, 1);
  EXPECT_THROW(crude_lb_construct_g(env, Curve::zero(), 5.0), RangeError);
  EXPECT_THROW(crude_lb_construct_g(env, Curve::zero(), 10.5), RangeError);
  EXPECT_THROW(crude_lb_check(env, Curve::zero(), 16.0, -1.0, -1.0, 0.0, {}), ConfigError);
}

TEST(CrudeLb, CalibrationReproducesFrozenGamma0) {
  const auto cal = calibrate_gamma0({16, 32, 64, 128, 256, 512, 1024}, {});
  EXPECT_NEAR(cal.gamma0, 1.4773802765855049, 1e-9);
  EXPECT_GE(cal.gamma0, cal.slope);
}

TEST(CrudeLb, CalibratedBoundHoldsOnFlatEnvironment) {
  const auto cal = calibrate_gamma0({16, 32, 64}, {});
  EXPECT_GT(cal.gamma0, 1.0);
  const auto r = crude_lb_check(det2(64), Curve::zero(), 64.0, -1.0, -1.0, cal.gamma0, {});
  EXPECT_TRUE(r.check.pass);
  EXPECT_GE(std::log(r.lhs), std::log(r.rhs));
}

TEST(Tilt, ZeroTiltIsExactlyOne) {
  const auto env = rand_env(16, 5);
  const auto r = girsanov_tilt_check(env, 16.0, Curve::zero(), 0.0, -2.0, -2.0, 10000, 3, {});
  EXPECT_DOUBLE_EQ(r.ratio_mc, 1.0);
  EXPECT_EQ(r.hits_base, r.hits_tilted);
  EXPECT_TRUE(r.check.pass);
}

TEST(Tilt, RejectsTooFewPaths) {
  const auto env = rand_env(16, 5);
  EXPECT_THROW(girsanov_tilt_check(env, 16.0, Curve::zero(), 0.1, -2.0, -2.0, 100, 3, {}), ConfigError);
}

TEST(Gamma, FlatUnrestrictedSlopeIsOneHalf) {
  const auto env = det2(128);
  const auto c = gamma_curve(env, Curve::zero(), 128.0, {4, 8, 16, 32, 64}, GammaWindow::Unrestricted, {});
  EXPECT_GT(c.slope_estimate, 0.4);
  EXPECT_LT(c.slope_estimate, 0.6);
  EXPECT_GE(c.sup_estimate, c.slope_estimate - 0.1);
}

TEST(Gamma, LadderValidation) {
  const auto env = det2(64);
  EXPECT_THROW(gamma_curve(env, Curve::zero(), 64.0, {2, 4}, GammaWindow::Unrestricted, {}), ConfigError);
  EXPECT_THROW(gamma_curve(env, Curve::zero(), 64.0, {2, 4, 40}, GammaWindow::Unrestricted, {}), RangeError);
}

TEST(Ratio, SameStartGivesUnitRatio) {
  const auto env = rand_env(64, 2);
  const auto r = ratio_start_shift(env, 64.0, Curve::zero(), -2.0, -2.0, -2.0, std::exp(-0.5), 0.5, {});
  EXPECT_NEAR(r.ratio_first, 1.0, 1e-12);
  EXPECT_THROW(ratio_start_shift(env, 64.0, Curve::zero(), -1.0, -9.0, -2.0, 0.6, 0.5, {}), RangeError);
  EXPECT_THROW(ratio_start_shift(env, 64.0, Curve::zero(), -3.0, -2.0, -2.0, 0.6, 0.5, {}), RangeError);
}

TEST(Ratio, FirstRatioAboveExplicitLowerBound) {
  const auto env = det2(256);
  for (double x : {-1.0, -2.0}) {
    const auto r = ratio_start_shift(env, 256.0, Curve::zero(), x, -4.0, -4.0, std::exp(-0.5), 0.5, {});
    EXPECT_GE(r.ratio_first, r.first_lower);
  }
}

TEST(Growth, FlatRatioNearThreeHalves) {
  const auto g = log_pn_growth(det2(1000), {10, 100, 1000}, -4.0, {});
  ASSERT_EQ(g.ratio.size(), 3u);
  for (double r : g.ratio) {
    EXPECT_GT(r, 0.3);
    EXPECT_LT(r, 3.0);
  }
  for (std::size_t i = 1; i < g.running_max.size(); ++i) EXPECT_GE(g.running_max[i], g.running_max[i - 1]);
  EXPECT_THROW(log_pn_growth(det2(100), {10, 50, 100}, -4.0, {}), ConfigError);
}

TEST(Tightness, DeterministicAndPooled) {
  TightnessConfig cfg;
  cfg.env = {OffspringLaw::uniform_int(2, 3), 0};
  cfg.envs = 3;
  cfg.replicas = 10;
  cfg.ns = {8, 16};
  cfg.brw = {16, BrwMode::Pruned, 6.0, 2'000'000, 0.02};
  const auto a = tightness_experiment(cfg, 11, 1);
  const auto b = tightness_experiment(cfg, 11, 3);
  ASSERT_EQ(a.rows.size(), 2u);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].samples, 30u);
    EXPECT_EQ(a.rows[i].q50, b.rows[i].q50);
    EXPECT_LE(a.rows[i].q25, a.rows[i].q50);
    EXPECT_LE(a.rows[i].q50, a.rows[i].q75);
    EXPECT_EQ(a.centered[i], b.centered[i]);
  }
}
