#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "brwre/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream o, e;
  const int code = brwre::cli::run(args, o, e);
  return {code, o.str(), e.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("brwre_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string out(const std::string& name) const { return (dir / name).string(); }
  fs::path dir;
};

}  // namespace

TEST(CsvField, QuotesOnlyWhenNeeded) {
  EXPECT_EQ(brwre::cli::csv_field("abc"), "abc");
  EXPECT_EQ(brwre::cli::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(brwre::cli::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(brwre::cli::csv_field("x\ny"), "\"x\ny\"");
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"bogus"}).code, 2);
  const auto r = cli({"simulate", "--threads", "many"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--threads"), std::string::npos);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  const auto r = cli({"env-sample", "--out", out("a"), "--set", "env.bogus=1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("env.bogus"), std::string::npos);
  EXPECT_EQ(cli({"env-sample", "--config", out("missing.ini")}).code, 2);
  EXPECT_EQ(cli({"env-sample", "--out", out("a"), "--set", "global.threads=0"}).code, 2);
}

TEST_F(Cli, SimulateBeyondEnvironmentExitsTwo) {
  const auto r = cli({"simulate", "--out", out("s"), "--set", "env.length=16", "--set", "brw.n=17"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("brw.n"), std::string::npos);
  EXPECT_NE(r.err.find("env.length"), std::string::npos);
}

TEST_F(Cli, EnvSampleWritesAllOutputs) {
  ASSERT_EQ(cli({"env-sample", "--out", out("e"), "--seed", "5", "--set", "env.length=20"}).code, 0);
  for (const char* f : {"results.csv", "report.json", "config.ini", "meta.json"})
    EXPECT_TRUE(fs::exists(dir / "e" / f)) << f;
  const auto csv = slurp(dir / "e" / "results.csv");
  EXPECT_EQ(csv.substr(0, 16), "k,l,kappa,K,W\r\n0");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 22);
  EXPECT_NE(slurp(dir / "e" / "config.ini").find("seed = 5"), std::string::npos);
  EXPECT_EQ(slurp(dir / "e" / "report.json").find("seconds"), std::string::npos);
  ASSERT_EQ(cli({"report", "--out", out("e")}).code, 0);
  EXPECT_NE(slurp(dir / "e" / "report.svg").find("<svg"), std::string::npos);
}

TEST_F(Cli, SimulateRepeatIsByteIdentical) {
  const std::vector<std::string> base{"--set", "env.length=24", "--set", "brw.n=20", "--set", "brw.replicas=12"};
  auto a = base, b = base;
  a.insert(a.begin(), {"simulate", "--out", out("a"), "--threads", "1"});
  b.insert(b.begin(), {"simulate", "--out", out("b"), "--threads", "3"});
  ASSERT_EQ(cli(a).code, 0);
  ASSERT_EQ(cli(b).code, 0);
  EXPECT_EQ(slurp(dir / "a" / "results.csv"), slurp(dir / "b" / "results.csv"));
  EXPECT_EQ(slurp(dir / "a" / "report.json"), slurp(dir / "b" / "report.json"));
}

TEST_F(Cli, ConfigFileAndSeedOverride) {
  {
    std::ofstream f(dir / "c.ini");
    f << "[global]\nseed = 3\n[env]\nlength = 10\n[barrier]\nt = 8\n";
  }
  ASSERT_EQ(cli({"barrier-prob", "--config", out("c.ini"), "--out", out("p"), "--seed", "4"}).code, 0);
  const auto ini = slurp(dir / "p" / "config.ini");
  EXPECT_NE(ini.find("seed = 4"), std::string::npos);
  EXPECT_NE(ini.find("t = 8"), std::string::npos);
  EXPECT_EQ(cli({"barrier-prob", "--config", out("c.ini"), "--out", out("p"), "--set", "barrier.t=11"}).code, 2);
}

TEST_F(Cli, VerifySubsetPassesAndRenders) {
  const auto r = cli({"verify-all", "--out", out("v"), "--set", "verify.criteria=2", "--set", "verify.mc_specs=2",
                      "--set", "verify.mc_paths=20000", "--set", "verify.mc_rel_tol=0.05"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  const auto csv = slurp(dir / "v" / "results.csv");
  EXPECT_NE(csv.find("2,engine_vs_mc,criterion"), std::string::npos);
  ASSERT_EQ(cli({"report", "--out", out("v")}).code, 0);
  EXPECT_NE(slurp(dir / "v" / "report.svg").find("PASS"), std::string::npos);
}
