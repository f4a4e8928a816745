#include <gtest/gtest.h>

#include <cmath>

#include "brwre/env.hpp"
#include "brwre/errors.hpp"
#include "brwre/stats.hpp"

using namespace brwre;

TEST(Env, DeterministicTwoValues) {
  auto env = sample_environment({OffspringLaw::deterministic(2), 10}, 1);
  EXPECT_NEAR(env.theta_star(), 1.1774100225154747, 1e-14);
  EXPECT_NEAR(env.big_k(3), 4.1588830833596715, 1e-13);
  for (double s : {0.0, 0.5, 3.0, 7.25, 10.0}) EXPECT_NEAR(env.w_at(s), 0.0, 1e-13);
}

TEST(Env, TwoPointLawHandArithmetic) {
  // l in {2, 8} with equal weights: E log L = 2 ln 2, theta* = 2 sqrt(ln 2).
  auto law = OffspringLaw::categorical({2, 8}, {0.5, 0.5});
  EXPECT_NEAR(law.theta_star(), 2.0 * std::sqrt(std::log(2.0)), 1e-14);
  Environment env(law, {2, 8, 8});
  EXPECT_NEAR(env.w_at(1.0), -0.41627730557884884, 1e-13);
  EXPECT_NEAR(env.w_at(0.5), 0.5 * -0.41627730557884884, 1e-13);
}

TEST(Env, UniformIntMeanLogIsTheIntegerAverage) {
  auto law = OffspringLaw::uniform_int(2, 8);
  EXPECT_NEAR(law.mean_log(), 1.51494327182075, 1e-13);
  auto env = sample_environment({law, 100000}, 42);
  std::vector<double> logs;
  for (std::size_t k = 1; k <= env.length(); ++k) logs.push_back(std::log(double(env.l(k))));
  auto e = mean_stderr(logs);
  EXPECT_NEAR(e.mean, law.mean_log(), 3 * e.stderr_);
}

TEST(Env, GeometricSeriesConverges) {
  auto law = OffspringLaw::geometric(0.5);
  double direct = 0.0;
  for (int k = 0; k < 200; ++k) direct += std::pow(0.5, k + 1) * std::log(2.0 + k);
  EXPECT_NEAR(law.mean_log(), direct, 1e-13);
  auto env = sample_environment({law, 50000}, 3);
  std::vector<double> logs;
  for (std::size_t k = 1; k <= env.length(); ++k) logs.push_back(std::log(double(env.l(k))));
  auto e = mean_stderr(logs);
  EXPECT_NEAR(e.mean, law.mean_log(), 4 * e.stderr_);
}

TEST(Env, SameSeedSameEnvironment) {
  EnvConfig cfg{OffspringLaw::uniform_int(2, 5), 500};
  EXPECT_EQ(sample_environment(cfg, 9).counts(), sample_environment(cfg, 9).counts());
  EXPECT_NE(sample_environment(cfg, 9).counts(), sample_environment(cfg, 10).counts());
}

TEST(Env, RejectsBadLaws) {
  EXPECT_THROW(OffspringLaw::deterministic(1), ConfigError);
  EXPECT_THROW(OffspringLaw::uniform_int(1, 3), ConfigError);
  EXPECT_THROW(OffspringLaw::categorical({2, 3}, {0.5, 0.6}), ConfigError);
  EXPECT_THROW(sample_environment({OffspringLaw::deterministic(2), 0}, 1), ConfigError);
}

TEST(Env, RangeChecks) {
  auto env = sample_environment({OffspringLaw::deterministic(3), 5}, 1);
  EXPECT_THROW(env.w_at(5.5), RangeError);
  EXPECT_THROW(env.big_k(6), RangeError);
  EXPECT_THROW(env.l(0), RangeError);
}

TEST(Env, WInterpolatesAndTelescopes) {
  auto env = sample_environment({OffspringLaw::uniform_int(2, 9), 40}, 5);
  const double th = env.theta_star();
  for (std::size_t k = 1; k <= 40; ++k) {
    EXPECT_NEAR(env.w_int(k) - env.w_int(k - 1), (std::log(double(env.l(k))) - 0.5 * th * th) / th, 1e-12);
    EXPECT_NEAR(env.w_at(k - 0.25), 0.75 * env.w_int(k) + 0.25 * env.w_int(k - 1), 1e-12);
  }
}

TEST(Env, SliceMatchesShiftedSums) {
  auto env = sample_environment({OffspringLaw::uniform_int(2, 4), 30}, 8);
  auto sl = env.slice(7);
  EXPECT_EQ(sl.length(), 23u);
  EXPECT_EQ(sl.theta_star(), env.theta_star());
  for (std::size_t k = 0; k <= 23; ++k)
    EXPECT_NEAR(sl.big_k(k), env.big_k(7 + k) - env.big_k(7), 1e-12);
}

TEST(Constants, DeterministicEnvironmentFloors) {
  auto env = sample_environment({OffspringLaw::deterministic(2), 64}, 1);
  auto c = env_constants(env, Curve::zero(), 64, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(c.c_log, 1.0);
  EXPECT_DOUBLE_EQ(c.c1_curve, 1.0);
  EXPECT_DOUBLE_EQ(c.c1_lambda, 4.0);
  EXPECT_NEAR(c.log_c2, -(128 + 16 + 80 + 134 + 96 + 32), 1e-12);
  EXPECT_DOUBLE_EQ(c.c3, std::pow(32 * 0.5 + 128.0, 4));
}

TEST(Constants, CLogDominatesEverySample) {
  auto env = sample_environment({OffspringLaw::categorical({2, 40}, {0.5, 0.5}), 200}, 2);
  const double c = c_log_of(env, 200);
  for (double s = std::exp(1.0); s <= 200; s += 0.01)
    ASSERT_LE(std::fabs(env.w_at(s)), c * std::sqrt(s * std::log(s)) * (1 + 1e-9)) << s;
}

TEST(Constants, C1OfBanana) {
  // ((1+s)^(1/6) - 1) / sqrt(1+s) peaks far below 1.
  EXPECT_DOUBLE_EQ(c1_of(Curve::pos_banana(), 100), 1.0);
  auto big = Curve::neg_banana(1.0 / 6.0, 40.0);
  const double c = c1_of(big, 100);
  for (double s = 0; s <= 100; s += 0.05)
    ASSERT_LE(std::fabs(big.value(s, 100)) / std::sqrt(1 + s), c * (1 + 1e-12));
  EXPECT_GT(c, 1.0);
}

TEST(Curve, ShapeAndSymmetry) {
  auto h = Curve::neg_banana(1.0 / 6.0, 0.5);
  EXPECT_DOUBLE_EQ(h.value(0, 10), 0.0);
  EXPECT_DOUBLE_EQ(h.value(10, 10), 0.0);
  EXPECT_NEAR(h.value(3, 10), h.value(7, 10), 1e-15);
  EXPECT_NEAR(h.value(5, 10), -0.5 * (std::pow(6.0, 1.0 / 6.0) - 1), 1e-15);
  EXPECT_NEAR(h.min_on(2, 8, 10), h.value(5, 10), 1e-15);
  EXPECT_NEAR(h.max_on(2, 4, 10), h.value(2, 10), 1e-15);
}
