#include <gtest/gtest.h>

#include <cmath>

#include "brwre/density.hpp"
#include "brwre/errors.hpp"
#include "brwre/stats.hpp"

using namespace brwre;

namespace {

double moment(const DensityGrid& g, int k) {
  CompensatedSum s;
  for (std::size_t i = 0; i < g.size(); ++i) s.add(g.mass[i] * std::pow(g.x(i), k));
  return s.value();
}

}  // namespace

TEST(Density, UnrestrictedStepsConserveMass) {
  DensityGrid g = DensityGrid::point(0.3, 0.02);
  for (int i = 0; i < 40; ++i) g = propagate_step(g, 0.1 * (i % 3 - 1), INFINITY, INFINITY, 0.7);
  EXPECT_NEAR(g.total() * std::exp(g.log_scale), 1.0, 1e-8);
}

TEST(Density, UnrestrictedStepsMatchGaussianMoments) {
  DensityGrid g = DensityGrid::point(0.0, 0.02);
  for (int i = 0; i < 10; ++i) g = propagate_step(g, 0.25, 1.0, StepMode::Free);
  EXPECT_NEAR(moment(g, 1), 2.5, 1e-9);
  EXPECT_NEAR(moment(g, 2) - 2.5 * 2.5, 10.0, 1e-7);
}

TEST(Density, KilledMassNeverExceedsInput) {
  DensityGrid g = DensityGrid::point(-0.5, 0.02);
  double prev = 1.0;
  for (int i = 0; i < 30; ++i) {
    g = propagate_step(g, (i % 2) ? 0.3 : -0.2, 1.0, StepMode::Continuous);
    const double m = g.total() * std::exp(g.log_scale);
    ASSERT_LE(m, prev * (1 + 1e-9));
    for (double w : g.mass) ASSERT_GE(w, 0.0);
    prev = m;
  }
}

TEST(Density, BarrierNodeCarriesNoMassWhenKilledContinuously) {
  DensityGrid g = propagate_step(DensityGrid::point(-1.0, 0.02), 0.0, 1.0, StepMode::Continuous);
  EXPECT_TRUE(g.closed_top);
  EXPECT_DOUBLE_EQ(g.x_top, 0.0);
  EXPECT_DOUBLE_EQ(g.mass[0], 0.0);
}

TEST(Density, OneStepSurvivalMatchesReflection) {
  // P_y(max_{[0,1]} B < 0) = 2 Phi(-y) - 1 for y < 0.
  for (double y : {-0.3, -1.0, -2.5}) {
    DensityGrid g = propagate_step(DensityGrid::point(y, 0.01), 0.0, 1.0, StepMode::Continuous);
    EXPECT_NEAR(g.total(), 2 * normal_cdf(-y) - 1, 2e-6) << y;
  }
}

TEST(Density, WindowMassIsAdditive) {
  DensityGrid g = DensityGrid::point(-1.0, 0.02);
  for (int i = 0; i < 3; ++i) g = propagate_step(g, 0.0, 1.0, StepMode::Continuous);
  const double a = g.window_mass(-3.0, -1.37), b = g.window_mass(-1.37, -0.2);
  EXPECT_NEAR(a + b, g.window_mass(-3.0, -0.2), 1e-14);
  EXPECT_NEAR(g.window_mass(-100, 0), g.total(), 1e-9);
}

TEST(Density, TruncateKeepsClosedLattice) {
  DensityGrid g = propagate_step(DensityGrid::point(0.0, 0.02), 0.0, 1.0, StepMode::Free);
  const DensityGrid t = truncate_at_zero(g);
  EXPECT_TRUE(t.closed_top);
  EXPECT_NEAR(t.total(), 0.5, 1e-6);
}

TEST(Density, CoarseGridRejected) {
  EXPECT_THROW(propagate_step(DensityGrid::point(-1, 0.2), 0.0, 1.0, StepMode::Continuous), DomainError);
  EXPECT_THROW(propagate_step(DensityGrid::point(-1, 0.02), 0.0, 0.0, StepMode::Free), DomainError);
}
