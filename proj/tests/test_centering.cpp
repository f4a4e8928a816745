#include <gtest/gtest.h>

#include <cmath>

#include "brwre/centering.hpp"
#include "brwre/errors.hpp"

using namespace brwre;

TEST(Centering, IdentityWithKnAndLogPn) {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto env = sample_environment({OffspringLaw::uniform_int(2, 3), 128}, seed);
    for (std::size_t n : {8, 32, 128}) {
      const auto r = m_n(env, n, -4.0, {});
      EXPECT_NEAR(env.theta_star() * r.m_n - env.big_k(n) - r.log_p_n, 0.0, 1e-10);
      EXPECT_LT(r.log_p_n, 0.0);
    }
  }
}

TEST(Centering, DeterministicCaseHasLogarithmicCorrection) {
  // W = 0: m_n = n theta* + log(p_n)/theta*, log p_n ~ -(3/2) log n + O(1).
  auto env = sample_environment({OffspringLaw::deterministic(2), 512}, 1);
  auto rs = m_n_sequence(env, {128, 512}, -4.0, {});
  const double th = env.theta_star();
  const double slope = (rs[1].log_p_n - rs[0].log_p_n) / std::log(4.0);
  EXPECT_NEAR(slope, -1.5, 0.2);
  EXPECT_NEAR(rs[1].m_n, 512 * th + rs[1].log_p_n / th, 1e-9);
}

TEST(Centering, ShiftedUsesSlicedEnvironment) {
  auto env = sample_environment({OffspringLaw::uniform_int(2, 3), 100}, 5);
  const auto a = m_n_shifted(env, 40, 13, -4.0, {});
  const auto b = m_n(env.slice(13), 40, -4.0, {});
  EXPECT_EQ(a.m_n, b.m_n);
  EXPECT_THROW(m_n_shifted(env, 90, 13, -4.0, {}), RangeError);
}

TEST(Centering, RefinementReportsSmallDelta) {
  auto env = sample_environment({OffspringLaw::uniform_int(2, 3), 64}, 2);
  const auto r = m_n(env, 64, -4.0, {}, true);
  EXPECT_GT(r.grid_delta, 0.0);
  EXPECT_LT(r.grid_delta, 1e-3);
}
