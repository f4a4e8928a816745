#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "brwre/brw.hpp"
#include "brwre/maxlaw.hpp"
#include "brwre/stats.hpp"

using namespace brwre;

TEST(MaxLaw, OneGenerationIsPowerOfPhi) {
  Environment env(OffspringLaw::uniform_int(2, 3), {3});
  MaxLawTable t(env, 1);
  for (double x : {-1.0, 0.0, 0.7, 2.0}) EXPECT_NEAR(t.cdf(0, x), std::pow(normal_cdf(x), 3), 2e-5);
}

TEST(MaxLaw, TwoGenerationsMatchQuadrature) {
  Environment env(OffspringLaw::deterministic(2), {2, 2});
  MaxLawTable t(env, 2, 0.01);
  for (double x : {-0.5, 0.5, 1.5, 2.5, 3.5}) {
    // [E Phi(x - Z)^2]^2 by Simpson on [-12, 12].
    const int n = 6000;
    const double a = -12, h = 24.0 / n;
    double s = 0;
    for (int i = 0; i <= n; ++i) {
      const double z = a + i * h;
      const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
      s += w * normal_pdf(z) * std::pow(normal_cdf(x - z), 2);
    }
    s *= h / 3;
    EXPECT_NEAR(t.values(0)[0] >= 0 ? t.cdf(0, x) : 0, s * s, 2e-6) << x;
  }
}

TEST(MaxLaw, TablesAreDistributionFunctions) {
  auto env = sample_environment({OffspringLaw::uniform_int(2, 3), 60}, 4);
  MaxLawTable t(env, 60);
  for (std::size_t k = 0; k < 60; ++k) {
    const auto& q = t.values(k);
    EXPECT_LT(q.front(), 1e-12);
    EXPECT_GT(q.back(), 1 - 1e-12);
    for (std::size_t i = 1; i < q.size(); ++i) ASSERT_GE(q[i], q[i - 1]);
  }
  bool clipped = false;
  const double x = t.quantile(0, 0.5, &clipped);
  EXPECT_FALSE(clipped);
  EXPECT_NEAR(t.cdf(0, x), 0.5, 1e-9);
}

TEST(MaxLaw, AgreesWithExactSimulation) {
  auto env = sample_environment({OffspringLaw::uniform_int(2, 3), 8}, 9);
  MaxLawTable t(env, 8);
  BrwConfig cfg;
  cfg.n = 8;
  BrwSimulator sim(env, cfg);
  std::vector<double> m;
  for (std::size_t r = 0; r < 3000; ++r) m.push_back(sim.run(replica_key(17, r)).max);
  std::sort(m.begin(), m.end());
  double d = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double f = t.cdf(0, m[i]);
    d = std::max({d, std::fabs(f - double(i) / m.size()), std::fabs(f - double(i + 1) / m.size())});
  }
  EXPECT_LT(d, 1.628 / std::sqrt(double(m.size())));
  EXPECT_NEAR(mean_stderr(m).mean, t.mean_of_max(), 4 * mean_stderr(m).stderr_);
}
