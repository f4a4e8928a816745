#include "brwre/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "brwre/errors.hpp"
#include "brwre/rng.hpp"

namespace brwre {

namespace {

using VT = ValueType;

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

double to_real(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  if (!s.empty() && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || s.empty()) bad(where, "expected a real number, got '" + s + "'");
  if (!std::isfinite(v)) bad(where, "value must be finite");
  return v;
}

std::int64_t to_int(const std::string& s, const std::string& where) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    bad(where, "expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t to_u64(const std::string& s, const std::string& where) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    bad(where, "expected an unsigned integer, got '" + s + "'");
  return v;
}

template <class F>
std::string join_mapped(const std::vector<std::string>& parts, F f) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ",";
    out += f(parts[i]);
  }
  return out;
}

std::string canonical(VT type, const std::string& value, const std::string& where) {
  const std::string v = trim(value);
  switch (type) {
    case VT::Int: return std::to_string(to_int(v, where));
    case VT::UInt: return std::to_string(to_u64(v, where));
    case VT::Real: return format_real(to_real(v, where));
    case VT::Bool:
      if (v == "true" || v == "1" || v == "yes") return "true";
      if (v == "false" || v == "0" || v == "no") return "false";
      bad(where, "expected true or false, got '" + v + "'");
    case VT::Text: return v;
    case VT::RealList:
      return join_mapped(split(v, ','), [&](const std::string& x) { return format_real(to_real(x, where)); });
    case VT::UIntList:
      return join_mapped(split(v, ','), [&](const std::string& x) { return std::to_string(to_u64(x, where)); });
    case VT::IntList:
      return join_mapped(split(v, ','), [&](const std::string& x) { return std::to_string(to_int(x, where)); });
    case VT::TextList:
      return join_mapped(split(v, ','), [&](const std::string& x) {
        if (x.empty()) bad(where, "empty list element");
        return x;
      });
  }
  return v;
}

const KeySpec* find_key(const std::string& section, const std::string& key) {
  for (const auto& s : config_schema())
    if (s.name == section)
      for (const auto& k : s.keys)
        if (k.key == key) return &k;
  return nullptr;
}

void check_choice(const std::string& where, const std::string& v, std::initializer_list<const char*> ok) {
  for (const char* o : ok)
    if (v == o) return;
  std::string list;
  for (const char* o : ok) list += std::string(list.empty() ? "" : ", ") + o;
  bad(where, "expected one of " + list + ", got '" + v + "'");
}

// Text keys with a closed vocabulary are checked on assignment.
void validate_text(const std::string& key, const std::string& v, const std::string& where) {
  try {
    if (key == "law" || key == "suite_law") parse_law(v);
    else if (key == "laws")
      for (const auto& x : split(v, ',')) parse_law(x);
    else if (key == "curve") parse_curve_shape(v);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    bad(where, e.what());
  }
  if (key == "mode") check_choice(where, v, {"exact", "pruned"});
  if (key == "monitoring") check_choice(where, v, {"continuous", "discrete"});
  if (key == "end") check_choice(where, v, {"unit", "range", "any"});
}

bool has_section(const std::string& section) {
  for (const auto& s : config_schema())
    if (s.name == section) return true;
  return false;
}

}  // namespace

std::string format_real(double x) {
  if (x == 0.0) return "0";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw NumericError("cannot format real");
  return std::string(buf, p);
}

const std::vector<SectionSpec>& config_schema() {
  static const std::vector<SectionSpec> schema = {
      {"global",
       {{"seed", VT::UInt, "20261014"},
        {"threads", VT::Int, "1"},
        {"out_dir", VT::Text, "out"},
        {"xi0", VT::Real, "-4"}}},
      {"grid",
       {{"dx", VT::Real, "0.02"},
        {"substeps", VT::Int, "1"},
        {"span", VT::Real, "9"},
        {"log_space", VT::Bool, "true"}}},
      {"env",
       {{"law", VT::Text, "uniform_int:2:3"},
        {"length", VT::UInt, "256"},
        {"curve", VT::Text, "zero"},
        {"lambda", VT::Real, "1"},
        {"gamma", VT::Real, "0.5"}}},
      {"barrier",
       {{"t", VT::Real, "16"},
        {"t_start", VT::Real, "0"},
        {"curve", VT::Text, "zero"},
        {"exponent", VT::Real, "0.16666666666666666"},
        {"scale", VT::Real, "1"},
        {"curve_horizon", VT::Real, "0"},
        {"drift_slope", VT::Real, "0"},
        {"start", VT::Real, "-1"},
        {"end", VT::Text, "unit"},
        {"end_lo", VT::Real, "-2"},
        {"end_hi", VT::Real, "-1"},
        {"free_until", VT::Real, "-1"},
        {"monitoring", VT::Text, "continuous"},
        {"mc_paths", VT::UInt, "0"}}},
      {"brw",
       {{"n", VT::UInt, "64"},
        {"mode", VT::Text, "pruned"},
        {"window", VT::Real, "6"},
        {"max_particles", VT::UInt, "2000000"},
        {"table_dx", VT::Real, "0.02"},
        {"replicas", VT::UInt, "200"}}},
      {"tightness",
       {{"laws", VT::TextList, "deterministic:2,uniform_int:2:3"},
        {"envs", VT::UInt, "30"},
        {"replicas", VT::UInt, "200"},
        {"ns", VT::UIntList, "32,64,128"},
        {"mode", VT::Text, "pruned"},
        {"window", VT::Real, "6"},
        {"iqr_factor", VT::Real, "1.5"},
        {"spread_factor", VT::Real, "2"}}},
      {"verify",
       {{"criteria", VT::IntList, ""},
        {"suite_law", VT::Text, "uniform_int:2:3"},
        {"bridge_paths", VT::UInt, "1000000"},
        {"bridge_dt", VT::Real, "0.001"},
        {"mc_specs", VT::UInt, "10"},
        {"mc_paths", VT::UInt, "100000"},
        {"mc_rel_tol", VT::Real, "0.02"},
        {"m2o_n", VT::UInt, "6"},
        {"m2o_reps", VT::UInt, "10000"},
        {"m2o_random", VT::UInt, "5"},
        {"breach_n", VT::UInt, "12"},
        {"breach_reps", VT::UInt, "10000"},
        {"breach_levels", VT::RealList, "-1,-2,-3"},
        {"tilt_t", VT::RealList, "16,64"},
        {"tilt_c", VT::RealList, "0.05,-0.05,0.2,-0.2"},
        {"tilt_y", VT::Real, "-2"},
        {"tilt_y0", VT::Real, "-2"},
        {"tilt_paths", VT::UInt, "100000"},
        {"assoc_reps", VT::UInt, "1000000"},
        {"crude_domination_t", VT::RealList, "16,64,256"},
        {"crude_t", VT::Real, "64"},
        {"crude_envs", VT::UInt, "50"},
        {"crude_y", VT::Real, "-1"},
        {"crude_y0", VT::Real, "-1"},
        {"crude_pass_rate", VT::Real, "0.95"},
        {"gamma0", VT::Real, "0"},
        {"gamma0_ladder", VT::RealList, "16,32,64,128,256,512,1024"},
        {"growth_envs", VT::UInt, "10"},
        {"growth_ns", VT::UIntList, "16,32,64,128,256,512,1024,2048,4096"},
        {"growth_limit", VT::Real, "0.1"},
        {"ratio_t", VT::Real, "256"},
        {"ratio_y", VT::RealList, "-3,-4"},
        {"ratio_x", VT::RealList, "-1,-2"},
        {"ratio_y0", VT::Real, "-4"},
        {"ratio_envs", VT::UInt, "4"},
        {"ratio_c", VT::Real, "0.6065306597126334"},
        {"gamma_ladder", VT::RealList, "2,4,8,16,32,64,128"}}},
  };
  return schema;
}

RunConfig::RunConfig() {
  for (const auto& s : config_schema())
    for (const auto& k : s.keys)
      values_[s.name][k.key] = canonical(k.type, k.default_value, s.name + "." + k.key);
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
  if (!has_section(section)) throw ConfigError("unknown section [" + section + "]");
  const KeySpec* k = find_key(section, key);
  if (!k) throw ConfigError("unknown key '" + section + "." + key + "'");
  const std::string where = section + "." + key;
  std::string v = canonical(k->type, value, where);
  validate_text(key, v, where);
  values_[section][key] = std::move(v);
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ConfigError("expected section.key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
      assignment.substr(eq + 1));
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig c;
  std::string section;
  std::map<std::string, int> seen;
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    std::string l = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (l.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (l.front() == '[') {
      if (l.back() != ']') bad(where, "malformed section header");
      section = trim(l.substr(1, l.size() - 2));
      if (!has_section(section)) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string::npos) bad(where, "expected key = value");
    const std::string key = trim(l.substr(0, eq));
    if (section.empty()) bad(where, "key '" + key + "' outside a section");
    if (!find_key(section, key)) throw ConfigError(where + ": unknown key '" + section + "." + key + "'");
    if (seen[section + "." + key]++) bad(where, "duplicate key '" + section + "." + key + "'");
    c.set(section, key, l.substr(eq + 1));
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

const std::string& RunConfig::raw(const std::string& section, const std::string& key) const {
  auto s = values_.find(section);
  if (s == values_.end()) throw ConfigError("unknown section [" + section + "]");
  auto k = s->second.find(key);
  if (k == s->second.end()) throw ConfigError("unknown key '" + section + "." + key + "'");
  return k->second;
}

std::int64_t RunConfig::integer(const std::string& s, const std::string& k) const {
  return to_int(raw(s, k), s + "." + k);
}
std::uint64_t RunConfig::u64(const std::string& s, const std::string& k) const {
  return to_u64(raw(s, k), s + "." + k);
}
double RunConfig::real(const std::string& s, const std::string& k) const {
  return to_real(raw(s, k), s + "." + k);
}
bool RunConfig::flag(const std::string& s, const std::string& k) const { return raw(s, k) == "true"; }
const std::string& RunConfig::text(const std::string& s, const std::string& k) const { return raw(s, k); }

std::vector<double> RunConfig::reals(const std::string& s, const std::string& k) const {
  std::vector<double> out;
  for (const auto& x : split(raw(s, k), ',')) out.push_back(to_real(x, s + "." + k));
  return out;
}
std::vector<std::size_t> RunConfig::sizes(const std::string& s, const std::string& k) const {
  std::vector<std::size_t> out;
  for (const auto& x : split(raw(s, k), ',')) out.push_back(to_u64(x, s + "." + k));
  return out;
}
std::vector<std::int64_t> RunConfig::integers(const std::string& s, const std::string& k) const {
  std::vector<std::int64_t> out;
  for (const auto& x : split(raw(s, k), ',')) out.push_back(to_int(x, s + "." + k));
  return out;
}
std::vector<std::string> RunConfig::texts(const std::string& s, const std::string& k) const {
  return split(raw(s, k), ',');
}

std::string RunConfig::serialize() const {
  std::string out;
  for (const auto& s : config_schema()) {
    if (!out.empty()) out += "\n";
    out += "[" + s.name + "]\n";
    for (const auto& k : s.keys) out += k.key + " = " + values_.at(s.name).at(k.key) + "\n";
  }
  return out;
}

std::uint64_t RunConfig::hash() const {
  std::string body;
  for (const auto& s : config_schema())
    for (const auto& k : s.keys) {
      if (s.name == "global" && (k.key == "threads" || k.key == "out_dir")) continue;
      body += s.name + "." + k.key + "=" + values_.at(s.name).at(k.key) + "\n";
    }
  return fnv1a64(body);
}

std::string RunConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

// ---- typed views --------------------------------------------------------------

OffspringLaw parse_law(const std::string& s) {
  const auto parts = split(s, ':');
  const std::string where = "law '" + s + "'";
  if (parts.empty()) bad(where, "empty law");
  const std::string& kind = parts[0];
  OffspringLaw law;
  if (kind == "deterministic" && parts.size() == 2) {
    law = OffspringLaw::deterministic(static_cast<int>(to_int(parts[1], where)));
  } else if (kind == "uniform_int" && parts.size() == 3) {
    law = OffspringLaw::uniform_int(static_cast<int>(to_int(parts[1], where)),
                                    static_cast<int>(to_int(parts[2], where)));
  } else if (kind == "geometric" && parts.size() == 2) {
    law = OffspringLaw::geometric(to_real(parts[1], where));
  } else if (kind == "categorical" && parts.size() == 3) {
    std::vector<int> vals;
    std::vector<double> probs;
    for (const auto& v : split(parts[1], '/')) vals.push_back(static_cast<int>(to_int(v, where)));
    for (const auto& p : split(parts[2], '/')) probs.push_back(to_real(p, where));
    law = OffspringLaw::categorical(vals, probs);
  } else {
    bad(where, "expected deterministic:m, uniform_int:a:b, geometric:p or categorical:v/v:p/p");
  }
  law.validate();
  return law;
}

std::string law_to_string(const OffspringLaw& law) {
  switch (law.kind) {
    case LawKind::Deterministic: return "deterministic:" + std::to_string(law.value);
    case LawKind::UniformInt: return "uniform_int:" + std::to_string(law.a) + ":" + std::to_string(law.b);
    case LawKind::Geometric: return "geometric:" + format_real(law.p);
    case LawKind::Categorical: {
      std::string v, p;
      for (std::size_t i = 0; i < law.values.size(); ++i) {
        if (i) {
          v += "/";
          p += "/";
        }
        v += std::to_string(law.values[i]);
        p += format_real(law.probs[i]);
      }
      return "categorical:" + v + ":" + p;
    }
  }
  return "";
}

GridConfig grid_config(const RunConfig& c) {
  GridConfig g;
  g.dx = c.real("grid", "dx");
  if (!(g.dx > 0.0)) throw ConfigError("grid.dx must be positive");
  const auto sub = c.integer("grid", "substeps");
  if (sub < 1) throw ConfigError("grid.substeps must be >= 1");
  g.substeps = static_cast<int>(sub);
  g.propagation.reach_sigmas = c.real("grid", "span");
  if (!(g.propagation.reach_sigmas >= 4.0)) throw ConfigError("grid.span must be >= 4 standard deviations");
  g.log_space = c.flag("grid", "log_space");
  return g;
}

EnvConfig env_config(const RunConfig& c) {
  EnvConfig e;
  e.law = parse_law(c.text("env", "law"));
  e.length = c.u64("env", "length");
  if (e.length == 0) throw ConfigError("env.length must be positive");
  return e;
}

namespace {

Curve curve_from(const std::string& name, double exponent, double scale) {
  Curve h;
  try {
    h.shape = parse_curve_shape(name);
  } catch (const std::exception&) {
    throw ConfigError("unknown curve '" + name + "' (zero, neg_banana, pos_banana)");
  }
  h.exponent = exponent;
  h.scale = scale;
  return h;
}

BrwMode mode_from(const std::string& key, const std::string& m) {
  if (m == "exact") return BrwMode::Exact;
  if (m == "pruned") return BrwMode::Pruned;
  throw ConfigError(key + ": expected exact or pruned, got '" + m + "'");
}

}  // namespace

BarrierSpec barrier_spec(const RunConfig& c) {
  BarrierSpec s;
  s.t = c.real("barrier", "t");
  s.t_start = c.real("barrier", "t_start");
  s.curve = curve_from(c.text("barrier", "curve"), c.real("barrier", "exponent"), c.real("barrier", "scale"));
  const double hz = c.real("barrier", "curve_horizon");
  if (hz > 0.0) s.curve_horizon = hz;
  s.drift_slope = c.real("barrier", "drift_slope");
  s.start_offset = c.real("barrier", "start");
  const std::string& end = c.text("barrier", "end");
  if (end == "unit") s.end = Window::unit_below(c.real("barrier", "end_hi"));
  else if (end == "range") s.end = Window::of(c.real("barrier", "end_lo"), c.real("barrier", "end_hi"));
  else if (end == "any") s.end = Window::any();
  else throw ConfigError("barrier.end: expected unit, range or any, got '" + end + "'");
  const double fu = c.real("barrier", "free_until");
  if (fu >= 0.0) s.free_until = fu;
  const std::string& mon = c.text("barrier", "monitoring");
  if (mon == "continuous") s.monitoring = Monitoring::Continuous;
  else if (mon == "discrete") s.monitoring = Monitoring::Discrete;
  else throw ConfigError("barrier.monitoring: expected continuous or discrete, got '" + mon + "'");
  return s;
}

BrwConfig brw_config(const RunConfig& c) {
  BrwConfig b;
  b.n = c.u64("brw", "n");
  if (b.n == 0) throw ConfigError("brw.n must be positive");
  b.mode = mode_from("brw.mode", c.text("brw", "mode"));
  b.window = c.real("brw", "window");
  b.max_particles = c.u64("brw", "max_particles");
  b.table_dx = c.real("brw", "table_dx");
  return b;
}

SuiteConfig suite_config(const RunConfig& c) {
  SuiteConfig s;
  s.grid = grid_config(c);
  s.xi0 = c.real("global", "xi0");
  s.suite_law = parse_law(c.text("verify", "suite_law"));
  s.bridge_paths = c.u64("verify", "bridge_paths");
  s.bridge_dt = c.real("verify", "bridge_dt");
  s.mc_specs = c.u64("verify", "mc_specs");
  s.mc_paths = c.u64("verify", "mc_paths");
  s.mc_rel_tol = c.real("verify", "mc_rel_tol");
  s.m2o_n = c.u64("verify", "m2o_n");
  s.m2o_reps = c.u64("verify", "m2o_reps");
  s.m2o_random = c.u64("verify", "m2o_random");
  s.breach_n = c.u64("verify", "breach_n");
  s.breach_reps = c.u64("verify", "breach_reps");
  s.breach_levels = c.reals("verify", "breach_levels");
  s.tilt_t = c.reals("verify", "tilt_t");
  s.tilt_c = c.reals("verify", "tilt_c");
  s.tilt_y = c.real("verify", "tilt_y");
  s.tilt_y0 = c.real("verify", "tilt_y0");
  s.tilt_paths = c.u64("verify", "tilt_paths");
  s.assoc_reps = c.u64("verify", "assoc_reps");
  s.crude_domination_t = c.reals("verify", "crude_domination_t");
  s.crude_t = c.real("verify", "crude_t");
  s.crude_envs = c.u64("verify", "crude_envs");
  s.crude_y = c.real("verify", "crude_y");
  s.crude_y0 = c.real("verify", "crude_y0");
  s.crude_pass_rate = c.real("verify", "crude_pass_rate");
  s.gamma0 = c.real("verify", "gamma0");
  s.gamma0_ladder = c.reals("verify", "gamma0_ladder");
  s.growth_envs = c.u64("verify", "growth_envs");
  s.growth_ns = c.sizes("verify", "growth_ns");
  s.growth_limit = c.real("verify", "growth_limit");
  s.tight_laws.clear();
  for (const auto& l : c.texts("tightness", "laws")) s.tight_laws.push_back(parse_law(l));
  s.tight_envs = c.u64("tightness", "envs");
  s.tight_reps = c.u64("tightness", "replicas");
  s.tight_ns = c.sizes("tightness", "ns");
  s.tight_brw = BrwConfig{};
  s.tight_brw.mode = mode_from("tightness.mode", c.text("tightness", "mode"));
  s.tight_brw.window = c.real("tightness", "window");
  s.tight_iqr_factor = c.real("tightness", "iqr_factor");
  s.tight_spread_factor = c.real("tightness", "spread_factor");
  s.ratio_t = c.real("verify", "ratio_t");
  s.ratio_y = c.reals("verify", "ratio_y");
  s.ratio_x = c.reals("verify", "ratio_x");
  s.ratio_y0 = c.real("verify", "ratio_y0");
  s.ratio_envs = c.u64("verify", "ratio_envs");
  s.ratio_c = c.real("verify", "ratio_c");
  s.gamma_ladder = c.reals("verify", "gamma_ladder");
  for (auto id : c.integers("verify", "criteria")) s.only.insert(static_cast<int>(id));
  if (s.tilt_t.empty() || s.tilt_c.empty() || s.breach_levels.empty() || s.tight_ns.empty() ||
      s.tight_laws.empty() || s.growth_ns.empty() || s.crude_domination_t.empty() || s.ratio_y.empty() ||
      s.ratio_x.empty())
    throw ConfigError("verify: list settings must not be empty");
  return s;
}

}  // namespace brwre
