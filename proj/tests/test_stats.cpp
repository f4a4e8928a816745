#include <gtest/gtest.h>

#include <cmath>

#include "brwre/stats.hpp"

using namespace brwre;

TEST(CompensatedSum, RecoversCancelledTerms) {
  CompensatedSum s;
  s.add(1.0);
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  EXPECT_DOUBLE_EQ(s.value(), 2.0);
}

TEST(Quantile, Type7Interpolation) {
  std::vector<double> x{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(quantile(x, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile(x, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile(x, 1.0), 4.0);
}

TEST(Ks, IdenticalSamplesGiveZero) {
  std::vector<double> a{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(ks_statistic(a, a), 0.0);
  EXPECT_DOUBLE_EQ(ks_statistic({1, 2}, {3, 4}), 1.0);
}

TEST(LogNormalCdf, MatchesDirectFormAndTail) {
  EXPECT_NEAR(log_normal_cdf(-3.0), std::log(normal_cdf(-3.0)), 1e-12);
  // Phi(-40) ~ phi(40)/40 * (1 - 1/1600 + ...)
  const double approx = -800.0 - std::log(40.0) - 0.5 * std::log(2 * M_PI) + std::log(1 - 1.0 / 1600 + 3.0 / 1600 / 1600);
  EXPECT_NEAR(log_normal_cdf(-40.0), approx, 1e-8);
}

TEST(LeastSquares, ExactLine) {
  auto f = least_squares({1, 2, 3}, {3, 5, 7});
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
}
