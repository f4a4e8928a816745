#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "brwre/rng.hpp"
#include "brwre/stats.hpp"

using namespace brwre;

TEST(Philox, KnownAnswerVectors) {
  auto z = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(z[0], 0x6627e8d5u);
  EXPECT_EQ(z[1], 0xe169c58du);
  EXPECT_EQ(z[2], 0xbc57ac4cu);
  EXPECT_EQ(z[3], 0x9b00dbd8u);
  auto f = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(f[0], 0x408f276du);
  EXPECT_EQ(f[1], 0x41c83b0eu);
  EXPECT_EQ(f[2], 0xa20bc7c6u);
  EXPECT_EQ(f[3], 0x6d5451fdu);
}

TEST(NormalQuantile, InvertsCdfAcrossBranches) {
  for (double p : {1e-300, 1e-100, 1e-20, 1e-8, 0.001, 0.02, 0.075, 0.3, 0.5, 0.7, 0.925, 0.98,
                   0.999, 1 - 1e-12}) {
    const double x = normal_quantile(p);
    const double back = p < 0.5 ? normal_cdf(x) : 1.0 - normal_cdf(-x);
    EXPECT_NEAR((p < 0.5 ? back / p : (1 - back) / (1 - p)), 1.0, 1e-12) << p;
  }
  EXPECT_DOUBLE_EQ(normal_quantile(0.5), 0.0);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-14);
}

TEST(Streams, DeterministicAndSeparated) {
  const auto k1 = derive_key("brw", 7, 0), k2 = derive_key("brw", 7, 1), k3 = derive_key("env", 7, 0);
  EXPECT_NE(k1, k2);
  EXPECT_NE(k1, k3);
  EXPECT_EQ(k1, derive_key("brw", 7, 0));
  Stream s(k1);
  EXPECT_EQ(s.uniform(3, 4), Stream(k1).uniform(3, 4));
  Sequence a(k1, 9), b(k1, 9);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.normal(), b.normal());
}

TEST(Streams, UniformMomentsAndRange) {
  Sequence seq(derive_key("test", 1), 0);
  MomentAccumulator acc;
  for (int i = 0; i < 200000; ++i) {
    const double u = seq.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    acc.add(u);
  }
  const auto e = acc.estimate();
  EXPECT_NEAR(e.mean, 0.5, 4 * e.stderr_);
}

TEST(Streams, NormalMoments) {
  Sequence seq(derive_key("test", 2), 0);
  MomentAccumulator m1, m2;
  for (int i = 0; i < 200000; ++i) {
    const double z = seq.normal();
    m1.add(z);
    m2.add(z * z);
  }
  EXPECT_NEAR(m1.estimate().mean, 0.0, 4 * m1.estimate().stderr_);
  EXPECT_NEAR(m2.estimate().mean, 1.0, 4 * m2.estimate().stderr_);
}
