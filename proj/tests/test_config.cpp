#include <gtest/gtest.h>

#include <cmath>

#include "brwre/config.hpp"
#include "brwre/errors.hpp"

using namespace brwre;

TEST(Config, DefaultsRoundTrip) {
  const RunConfig a;
  const RunConfig b = RunConfig::parse(a.serialize());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.serialize(), b.serialize());
  EXPECT_EQ(a.hash(), b.hash());
}

TEST(Config, ParsesCommentsAndOverrides) {
  const auto c = RunConfig::parse(
      "# top\n[global]\nseed = 7 \n; other comment\n[env]\nlaw = deterministic:2\nlength=32\n");
  EXPECT_EQ(c.u64("global", "seed"), 7u);
  EXPECT_EQ(c.integer("env", "length"), 32);
  EXPECT_EQ(env_config(c).law.theta_star(), OffspringLaw::deterministic(2).theta_star());
  const RunConfig d = RunConfig::parse(c.serialize());
  EXPECT_EQ(c, d);
}

TEST(Config, UnknownKeyIsNamed) {
  try {
    RunConfig::parse("[brw]\nwindw = 3\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("brw.windw"), std::string::npos);
  }
  EXPECT_THROW(RunConfig::parse("[nosuch]\nx = 1\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse("[brw]\nn = 3\nn = 4\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse("seed = 1\n"), ConfigError);
}

TEST(Config, TypeErrors) {
  RunConfig c;
  EXPECT_THROW(c.set("brw", "n", "abc"), ConfigError);
  EXPECT_THROW(c.set("brw", "n", "-3"), ConfigError);
  EXPECT_THROW(c.set("grid", "dx", "fast"), ConfigError);
  EXPECT_THROW(c.set_assignment("brw.n"), ConfigError);
  c.set_assignment("brw.n=12");
  EXPECT_EQ(c.u64("brw", "n"), 12u);
}

TEST(Config, HashIgnoresThreadsAndOutDir) {
  RunConfig a, b;
  b.set("global", "threads", "8");
  b.set("global", "out_dir", "elsewhere");
  EXPECT_EQ(a.hash(), b.hash());
  b.set("global", "seed", "99");
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(a.hash_hex().size(), 16u);
}

TEST(Config, LawRoundTrip) {
  for (std::string s : {"deterministic:2", "uniform_int:2:8", "categorical:2/8:0.5/0.5"}) {
    EXPECT_EQ(law_to_string(parse_law(s)), s);
  }
  EXPECT_THROW(parse_law("uniform_int:3"), ConfigError);
  EXPECT_THROW(parse_law("poisson:2"), ConfigError);
  EXPECT_THROW(parse_law("deterministic:1"), std::exception);
}

TEST(Config, RealFormatting) {
  EXPECT_EQ(format_real(0.0), "0");
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(std::stod(format_real(M_PI)), M_PI);
  EXPECT_EQ(format_real(-4.0), "-4");
}

TEST(Config, ViewsFollowValues) {
  RunConfig c;
  c.set("brw", "mode", "exact");
  c.set("brw", "n", "20");
  EXPECT_EQ(brw_config(c).mode, BrwMode::Exact);
  EXPECT_EQ(brw_config(c).n, 20u);
  c.set("verify", "criteria", "1,3");
  const auto s = suite_config(c);
  EXPECT_EQ(s.only.size(), 2u);
  EXPECT_TRUE(s.only.count(3));
  EXPECT_THROW(c.set("brw", "mode", "lazy"), ConfigError);
}

TEST(Config, BundledDefaultParsesAndIsCanonical) {
  const auto c = RunConfig::load(std::string(BRWRE_SOURCE_DIR) + "/configs/default.ini");
  EXPECT_NEAR(c.real("verify", "gamma0"), 1.4773802765855049, 0.0);
  RunConfig d;
  d.set("verify", "gamma0", "1.4773802765855049");
  EXPECT_EQ(c, d);
}
