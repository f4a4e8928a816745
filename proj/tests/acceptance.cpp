// One PASS/FAIL line per acceptance criterion; exits 1 if any is red.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "brwre/cli.hpp"
#include "brwre/config.hpp"
#include "brwre/suite.hpp"

namespace fs = std::filesystem;
using namespace brwre;

namespace {

// wall-clock limits in seconds, single machine
const std::map<int, double> kLimit = {{1, 60},  {2, 300}, {3, 300}, {4, 300},  {5, 600},
                                      {6, 120}, {7, 600}, {8, 600}, {9, 1800}, {10, 300}};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

bool reproducible(const fs::path& root, std::string& detail) {
  const std::vector<std::string> base = {"verify-all",   "--seed", "77",
                                         "--set",        "verify.criteria=2,3,4,6",
                                         "--set",        "verify.mc_specs=3",
                                         "--set",        "verify.mc_paths=20000",
                                         "--set",        "verify.m2o_reps=2000",
                                         "--set",        "verify.breach_reps=1000",
                                         "--set",        "verify.assoc_reps=20000"};
  std::vector<std::string> dirs;
  int run = 0;
  for (const char* threads : {"1", "1", "8"}) {
    auto args = base;
    const std::string out = (root / ("run" + std::to_string(run++))).string();
    args.insert(args.end(), {"--threads", threads, "--out", out});
    std::ostringstream o, e;
    const int code = cli::run(args, o, e);
    if (code != 0 && code != 1) {
      detail = "verify-all exit " + std::to_string(code) + ": " + e.str();
      return false;
    }
    dirs.push_back(out);
  }
  for (std::size_t i = 1; i < dirs.size(); ++i)
    for (const char* f : {"results.csv", "report.json"})
      if (slurp(fs::path(dirs[0]) / f) != slurp(fs::path(dirs[i]) / f)) {
        detail = std::string(f) + " differs between run 0 and run " + std::to_string(i);
        return false;
      }
  detail = "results.csv and report.json byte-identical over 2 repeats and threads 1 vs 8";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path cfg_path = BRWRE_DEFAULT_CONFIG;
  int threads = 1;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") cfg_path = argv[i + 1];
    if (std::string(argv[i]) == "--threads") threads = std::stoi(argv[i + 1]);
  }
  const RunConfig rc = RunConfig::load(cfg_path.string());
  SuiteConfig sc = suite_config(rc);
  sc.only.clear();
  bool all = true;
  run_suite(sc, rc.u64("global", "seed"), threads, [&](const CriterionResult& c) {
    const double limit = kLimit.at(c.id);
    const bool ok = c.pass && c.seconds <= limit;
    all = all && ok;
    std::printf("%s criterion %d %s: %s [%.1f s, limit %.0f s]\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(),
                c.summary.c_str(), c.seconds, limit);
    for (const auto& k : c.checks)
      if (!k.pass && !k.advisory)
        std::printf("    failed check %s: observed %.6g, bound %.6g, stderr %.3g %s\n", k.name.c_str(), k.value,
                    k.reference, k.stderr_, k.note.c_str());
    std::fflush(stdout);
  });

  const fs::path root = fs::temp_directory_path() / "brwre_acceptance";
  fs::remove_all(root);
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  const bool ok11 = reproducible(root, detail);
  const double s11 = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  fs::remove_all(root);
  all = all && ok11;
  std::printf("%s criterion 11 reproducibility: %s [%.1f s]\n", ok11 ? "PASS" : "FAIL", detail.c_str(), s11);
  return all ? 0 : 1;
}
