#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "brwre/barrier.hpp"
#include "brwre/brw.hpp"
#include "brwre/env.hpp"
#include "brwre/suite.hpp"

namespace brwre {

enum class ValueType { Int, UInt, Real, Bool, Text, RealList, UIntList, IntList, TextList };

struct KeySpec {
  std::string key;
  ValueType type;
  std::string default_value;
};

struct SectionSpec {
  std::string name;
  std::vector<KeySpec> keys;
};

const std::vector<SectionSpec>& config_schema();

// Sectioned key = value text:
//
//   [global]
//   seed = 7
//   # comment
//
// Every key has a typed default; unknown sections or keys are errors.
class RunConfig {
 public:
  RunConfig();  // all defaults

  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::string& path);

  // Validates and stores the canonical form of value.
  void set(const std::string& section, const std::string& key, const std::string& value);
  // "section.key=value"
  void set_assignment(const std::string& assignment);
  const std::string& raw(const std::string& section, const std::string& key) const;

  std::int64_t integer(const std::string& section, const std::string& key) const;
  std::uint64_t u64(const std::string& section, const std::string& key) const;
  double real(const std::string& section, const std::string& key) const;
  bool flag(const std::string& section, const std::string& key) const;
  const std::string& text(const std::string& section, const std::string& key) const;
  std::vector<double> reals(const std::string& section, const std::string& key) const;
  std::vector<std::size_t> sizes(const std::string& section, const std::string& key) const;
  std::vector<std::int64_t> integers(const std::string& section, const std::string& key) const;
  std::vector<std::string> texts(const std::string& section, const std::string& key) const;

  // All keys in schema order, canonical values.
  std::string serialize() const;
  // FNV-1a of the serialization without global.threads and global.out_dir.
  std::uint64_t hash() const;
  std::string hash_hex() const;

  bool operator==(const RunConfig& o) const { return values_ == o.values_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> values_;
};

// Offspring laws as text: deterministic:2, uniform_int:2:3, geometric:0.5,
// categorical:2/8:0.5/0.5
OffspringLaw parse_law(const std::string& s);
std::string law_to_string(const OffspringLaw& law);

// Shortest round-trip decimal form.
std::string format_real(double x);

GridConfig grid_config(const RunConfig& c);
EnvConfig env_config(const RunConfig& c);
BarrierSpec barrier_spec(const RunConfig& c);
BrwConfig brw_config(const RunConfig& c);
SuiteConfig suite_config(const RunConfig& c);

}  // namespace brwre
