#include "brwre/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "brwre/centering.hpp"
#include "brwre/config.hpp"
#include "brwre/errors.hpp"
#include "brwre/parallel.hpp"
#include "brwre/rng.hpp"
#include "brwre/stats.hpp"
#include "brwre/suite.hpp"

namespace brwre::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::vector<std::string> sets;
};

struct Context {
  RunConfig cfg;
  std::uint64_t seed = 0;
  int threads = 1;
  fs::path out_dir;
  std::string hash;
};

Context make_context(const Common& c) {
  Context ctx;
  ctx.cfg = c.config.empty() ? RunConfig() : RunConfig::load(c.config);
  for (const auto& s : c.sets) ctx.cfg.set_assignment(s);
  if (c.seed) ctx.cfg.set("global", "seed", std::to_string(*c.seed));
  if (c.threads) ctx.cfg.set("global", "threads", std::to_string(*c.threads));
  if (c.out) ctx.cfg.set("global", "out_dir", *c.out);
  ctx.seed = ctx.cfg.u64("global", "seed");
  const auto th = ctx.cfg.integer("global", "threads");
  if (th < 1 || th > 1024) throw ConfigError("global.threads must be in [1, 1024]");
  ctx.threads = static_cast<int>(th);
  ctx.out_dir = ctx.cfg.text("global", "out_dir");
  if (ctx.out_dir.empty()) throw ConfigError("global.out_dir must not be empty");
  ctx.hash = ctx.cfg.hash_hex();
  return ctx;
}

std::string num(double x) { return format_real(x); }

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : cols_(header.size()) { row(header); }
  void row(const std::vector<std::string>& fields) {
    if (fields.size() != cols_) throw StateError("CSV row width mismatch");
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) body_ += ",";
      body_ += csv_field(fields[i]);
    }
    body_ += "\r\n";
  }
  const std::string& str() const { return body_; }

 private:
  std::size_t cols_;
  std::string body_;
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ResourceError("cannot write " + p.string());
  f << content;
}

json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json check_json(const CheckResult& c, const Context& ctx) {
  json j;
  j["name"] = c.name;
  j["pass"] = c.pass;
  j["advisory"] = c.advisory;
  j["inconclusive"] = c.inconclusive;
  j["observed"] = jnum(c.value);
  j["bound"] = jnum(c.reference);
  j["stderr"] = jnum(c.stderr_);
  j["margin"] = jnum(c.margin);
  json m = json::object();
  for (const auto& [k, v] : c.metrics) m[k] = jnum(v);
  j["details"] = m;
  j["note"] = c.note;
  j["config_hash"] = ctx.hash;
  j["seed"] = ctx.seed;
  return j;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void finish(const Context& ctx, const std::string& sub, const std::string& csv, const json& report,
            double seconds, json extra_meta = json::object()) {
  fs::create_directories(ctx.out_dir);
  write_file(ctx.out_dir / "results.csv", csv);
  write_file(ctx.out_dir / "report.json", report.dump(2) + "\n");
  write_file(ctx.out_dir / "config.ini", ctx.cfg.serialize());
  json meta;
  meta["subcommand"] = sub;
  meta["version"] = kVersion;
  meta["config_hash"] = ctx.hash;
  meta["seed"] = ctx.seed;
  meta["threads"] = ctx.threads;
  meta["timestamp_utc"] = utc_now();
  meta["seconds"] = seconds;
  for (auto& [k, v] : extra_meta.items()) meta[k] = v;
  write_file(ctx.out_dir / "meta.json", meta.dump(2) + "\n");
}

json report_head(const Context& ctx, const std::string& sub) {
  json r;
  r["subcommand"] = sub;
  r["config_hash"] = ctx.hash;
  r["seed"] = ctx.seed;
  return r;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Environment environment_of(const Context& ctx) { return sample_environment(env_config(ctx.cfg), ctx.seed); }

// ---- subcommands ----------------------------------------------------------------

int cmd_env_sample(const Context& ctx, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Environment env = environment_of(ctx);
  Csv csv({"k", "l", "kappa", "K", "W"});
  csv.row({"0", "", "", "0", "0"});
  for (std::size_t k = 1; k <= env.length(); ++k)
    csv.row({std::to_string(k), std::to_string(env.l(k)), num(env.kappa(k)), num(env.big_k(k)),
             num(env.w_int(k))});
  Curve h;
  try {
    h.shape = parse_curve_shape(ctx.cfg.text("env", "curve"));
  } catch (const std::exception&) {
    throw ConfigError("env.curve: unknown curve '" + ctx.cfg.text("env", "curve") + "'");
  }
  const double t = static_cast<double>(env.length());
  const auto k = env_constants(env, h, t, ctx.cfg.real("env", "lambda"), ctx.cfg.real("env", "gamma"));
  double mean = 0.0;
  for (int l : env.counts()) mean += std::log(static_cast<double>(l));
  mean /= t;
  json r = report_head(ctx, "env-sample");
  r["law"] = law_to_string(env.law());
  r["length"] = env.length();
  r["theta_star"] = env.theta_star();
  r["mean_log_law"] = env.law().mean_log();
  r["mean_log_sample"] = mean;
  r["K_n"] = env.big_k(env.length());
  r["W_n"] = env.w_int(env.length());
  r["constants"] = {{"horizon", t},           {"curve", h.name()},     {"C_log", k.c_log},
                    {"C1", k.c1_curve},       {"log_C2", k.log_c2},    {"C3", jnum(k.c3)},
                    {"c1_lambda", k.c1_lambda}, {"gamma", k.gamma}};
  out << "theta* = " << num(env.theta_star()) << ", K_n = " << num(env.big_k(env.length())) << "\n";
  finish(ctx, "env-sample", csv.str(), r, seconds_since(t0));
  return 0;
}

int cmd_barrier_prob(const Context& ctx, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Environment env = environment_of(ctx);
  const BarrierSpec spec = barrier_spec(ctx.cfg);
  if (spec.t > static_cast<double>(env.length()))
    throw ConfigError("barrier.t = " + num(spec.t) + " exceeds env.length = " + std::to_string(env.length()));
  const GridConfig grid = grid_config(ctx.cfg);
  const double lp = barrier_log_probability(env, spec, grid);
  const auto refined = barrier_probability_refined(env, spec, grid);
  const std::uint64_t paths = ctx.cfg.u64("barrier", "mc_paths");
  std::optional<McEstimate> mc;
  if (paths > 0) mc = barrier_probability_mc(env, spec, grid, paths, derive_key("cli-mc", ctx.seed), ctx.threads);
  Csv csv({"t", "curve", "start", "probability", "log_probability", "probability_half_dx", "grid_delta",
           "mc_estimate", "mc_stderr", "mc_paths"});
  csv.row({num(spec.t), spec.curve.name(), num(spec.start_offset), num(std::exp(lp)), num(lp),
           num(refined.value_half_dx), num(refined.delta), mc ? num(mc->estimate) : "",
           mc ? num(mc->stderr_) : "", std::to_string(paths)});
  json r = report_head(ctx, "barrier-prob");
  r["probability"] = jnum(std::exp(lp));
  r["log_probability"] = jnum(lp);
  r["probability_half_dx"] = jnum(refined.value_half_dx);
  r["grid_delta"] = jnum(refined.delta);
  if (mc) r["mc"] = {{"estimate", mc->estimate}, {"stderr", mc->stderr_}, {"paths", mc->paths}};
  out << "P = " << num(std::exp(lp)) << " (log " << num(lp) << ")\n";
  finish(ctx, "barrier-prob", csv.str(), r, seconds_since(t0));
  return 0;
}

int cmd_simulate(const Context& ctx, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Environment env = environment_of(ctx);
  const BrwConfig bc = brw_config(ctx.cfg);
  if (bc.n > env.length())
    throw ConfigError("brw.n = " + std::to_string(bc.n) + " exceeds env.length = " + std::to_string(env.length()));
  const std::uint64_t reps = ctx.cfg.u64("brw", "replicas");
  if (reps == 0) throw ConfigError("brw.replicas must be positive");
  const GridConfig grid = grid_config(ctx.cfg);
  const double xi0 = ctx.cfg.real("global", "xi0");
  const auto rec = m_n(env, bc.n, xi0, grid);
  const BrwSimulator sim(env, bc);
  const std::uint64_t base = derive_key("simulate", ctx.seed);
  auto outs = parallel_map<ReplicaOutcome>(reps, ctx.threads, [&](std::size_t r) {
    return sim.run(replica_key(base, r));
  });
  Csv csv({"replica", "max", "m_n", "centered", "substituted", "table_clipped"});
  std::vector<double> centered;
  std::size_t substituted = 0;
  bool clipped = false;
  for (std::size_t r = 0; r < outs.size(); ++r) {
    const auto& o = outs[r];
    centered.push_back(o.max - rec.m_n);
    substituted += o.diag.substituted;
    clipped = clipped || o.diag.table_clipped;
    csv.row({std::to_string(r), num(o.max), num(rec.m_n), num(o.max - rec.m_n),
             std::to_string(o.diag.substituted), o.diag.table_clipped ? "1" : "0"});
  }
  json r = report_head(ctx, "simulate");
  r["n"] = bc.n;
  r["mode"] = bc.mode == BrwMode::Exact ? "exact" : "pruned";
  r["replicas"] = reps;
  r["m_n"] = rec.m_n;
  r["K_n"] = rec.big_k;
  r["log_p_n"] = rec.log_p_n;
  const auto ms = mean_stderr(centered);
  r["centered"] = {{"mean", ms.mean},
                   {"stderr", ms.stderr_},
                   {"q05", quantile(centered, 0.05)},
                   {"q25", quantile(centered, 0.25)},
                   {"q50", quantile(centered, 0.50)},
                   {"q75", quantile(centered, 0.75)},
                   {"q95", quantile(centered, 0.95)}};
  r["diagnostics"] = {{"substituted", substituted}, {"table_clipped", clipped}};
  out << "m_n = " << num(rec.m_n) << ", median M_n - m_n = " << num(quantile(centered, 0.5)) << "\n";
  finish(ctx, "simulate", csv.str(), r, seconds_since(t0));
  return 0;
}

int cmd_tightness(const Context& ctx, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const SuiteConfig sc = suite_config(ctx.cfg);
  Csv csv({"law", "n", "samples", "q01", "q05", "q25", "q50", "q75", "q95", "q99", "iqr", "p95_minus_p05"});
  json r = report_head(ctx, "tightness");
  r["mode"] = "annealed";
  r["env_count"] = sc.tight_envs;
  r["replicas_per_env"] = sc.tight_reps;
  json laws = json::array();
  for (std::size_t i = 0; i < sc.tight_laws.size(); ++i) {
    TightnessConfig tc;
    tc.env = {sc.tight_laws[i], 0};
    tc.envs = sc.tight_envs;
    tc.replicas = sc.tight_reps;
    tc.ns = sc.tight_ns;
    tc.brw = sc.tight_brw;
    tc.xi0 = sc.xi0;
    tc.grid = sc.grid;
    const auto rep = tightness_experiment(tc, derive_key("tightness", ctx.seed, i), ctx.threads);
    const std::string law = law_to_string(sc.tight_laws[i]);
    json rows = json::array();
    for (const auto& row : rep.rows) {
      csv.row({law, std::to_string(row.n), std::to_string(row.samples), num(row.q01), num(row.q05),
               num(row.q25), num(row.q50), num(row.q75), num(row.q95), num(row.q99), num(row.iqr),
               num(row.spread)});
      rows.push_back({{"n", row.n},     {"replicas", row.samples}, {"q01", row.q01}, {"q05", row.q05},
                      {"q25", row.q25}, {"q50", row.q50},          {"q75", row.q75}, {"q95", row.q95},
                      {"q99", row.q99}, {"iqr", row.iqr},          {"p95_minus_p05", row.spread}});
      out << law << " n=" << row.n << " iqr=" << num(row.iqr) << " spread=" << num(row.spread) << "\n";
    }
    const auto assess = tightness_check(rep, sc.tight_iqr_factor, sc.tight_spread_factor);
    laws.push_back({{"law", law},
                    {"rows", rows},
                    {"substituted", rep.substituted},
                    {"table_clipped", rep.table_clipped},
                    {"assessment", check_json(assess, ctx)}});
  }
  r["laws"] = laws;
  finish(ctx, "tightness", csv.str(), r, seconds_since(t0));
  return 0;
}

int cmd_verify_all(const Context& ctx, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const SuiteConfig sc = suite_config(ctx.cfg);
  json timings = json::object();
  const auto results = run_suite(sc, ctx.seed, ctx.threads, [&](const CriterionResult& c) {
    out << "criterion " << c.id << " " << c.name << ": " << (c.pass ? "PASS" : "FAIL") << " (" << c.summary
        << ")" << std::endl;
  });
  Csv csv({"criterion", "criterion_name", "level", "check", "pass", "advisory", "observed", "bound", "stderr",
           "margin", "note"});
  json r = report_head(ctx, "verify-all");
  json crit = json::array();
  bool all = true;
  for (const auto& c : results) {
    all = all && c.pass;
    timings[std::to_string(c.id)] = c.seconds;
    csv.row({std::to_string(c.id), c.name, "criterion", "", c.pass ? "true" : "false", "false", "", "", "", "",
             c.summary});
    json checks = json::array();
    for (const auto& k : c.checks) {
      csv.row({std::to_string(c.id), c.name, "check", k.name, k.pass ? "true" : "false",
               k.advisory ? "true" : "false", num(k.value), num(k.reference), num(k.stderr_), num(k.margin),
               k.note});
      checks.push_back(check_json(k, ctx));
    }
    crit.push_back({{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"summary", c.summary}, {"checks", checks}});
  }
  r["pass"] = all;
  r["criteria"] = crit;
  finish(ctx, "verify-all", csv.str(), r, seconds_since(t0), {{"criterion_seconds", timings}});
  return all ? 0 : 1;
}

// ---- report ---------------------------------------------------------------------

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string s = ss.str();
  std::vector<std::vector<std::string>> rows(1);
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char ch = s[i];
    if (quoted) {
      if (ch == '"' && i + 1 < s.size() && s[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      rows.back().push_back(field);
      field.clear();
    } else if (ch == '\r') {
    } else if (ch == '\n') {
      rows.back().push_back(field);
      field.clear();
      rows.emplace_back();
    } else {
      field += ch;
    }
  }
  if (!field.empty() || !rows.back().empty()) rows.back().push_back(field);
  if (rows.back().empty()) rows.pop_back();
  return rows;
}

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

struct Svg {
  double w, h;
  std::ostringstream body;
  Svg(double w_, double h_) : w(w_), h(h_) {}
  void text(double x, double y, const std::string& s, int size = 12, const char* anchor = "start",
            const char* fill = "#222") {
    body << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << size
         << "\" font-family=\"monospace\" text-anchor=\"" << anchor << "\" fill=\"" << fill << "\">"
         << xml_escape(s) << "</text>\n";
  }
  void line(double x1, double y1, double x2, double y2, const char* stroke = "#222", double sw = 1) {
    body << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
         << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(sw) << "\"/>\n";
  }
  void rect(double x, double y, double rw, double rh, const char* fill, const char* stroke = "none") {
    body << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(rw) << "\" height=\""
         << num(rh) << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
  }
  std::string str() const {
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" viewBox=\"0 0 " << num(w) << " " << num(h) << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << body.str() << "</svg>\n";
    return o.str();
  }
};

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ConfigError("results.csv has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

double cell(const std::vector<std::string>& row, std::size_t i) {
  if (i >= row.size() || row[i].empty()) return NAN;
  return std::strtod(row[i].c_str(), nullptr);
}

bool has(const std::vector<std::string>& header, const std::string& name) {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::string svg_tightness(const std::vector<std::vector<std::string>>& rows) {
  const auto& hd = rows[0];
  const auto cl = column(hd, "law"), cn = column(hd, "n"), c05 = column(hd, "q05"), c25 = column(hd, "q25"),
             c50 = column(hd, "q50"), c75 = column(hd, "q75"), c95 = column(hd, "q95");
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    lo = std::min(lo, cell(rows[i], c05));
    hi = std::max(hi, cell(rows[i], c95));
  }
  const double pad = 0.1 * (hi - lo + 1e-9);
  lo -= pad;
  hi += pad;
  const double slot = 70.0, left = 60.0, top = 40.0, ph = 300.0;
  const std::size_t k = rows.size() - 1;
  Svg s(left + slot * k + 40.0, top + ph + 70.0);
  s.text(left, 24, "M_n - m_n quantiles (box 25-75%, whiskers 5-95%)", 14);
  auto y = [&](double v) { return top + ph * (hi - v) / (hi - lo); };
  s.line(left - 5, top, left - 5, top + ph);
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    s.text(left - 10, y(v) + 4, num(std::round(v * 100) / 100), 10, "end");
  }
  for (std::size_t i = 0; i < k; ++i) {
    const auto& r = rows[i + 1];
    const double x = left + slot * i + slot / 2;
    s.line(x, y(cell(r, c05)), x, y(cell(r, c95)), "#555");
    s.rect(x - 15, y(cell(r, c75)), 30, y(cell(r, c25)) - y(cell(r, c75)), "#9ecae1", "#08519c");
    s.line(x - 15, y(cell(r, c50)), x + 15, y(cell(r, c50)), "#08306b", 2);
    s.text(x, top + ph + 18, "n=" + r[cn], 10, "middle");
    s.text(x, top + ph + 32, r[cl], 9, "middle");
  }
  return s.str();
}

std::string svg_verify(const std::vector<std::vector<std::string>>& rows) {
  const auto& hd = rows[0];
  const auto cid = column(hd, "criterion"), cname = column(hd, "criterion_name"), clev = column(hd, "level"),
             cp = column(hd, "pass"), cnote = column(hd, "note");
  std::vector<const std::vector<std::string>*> crit;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i][clev] == "criterion") crit.push_back(&rows[i]);
  Svg s(900, 60 + 24.0 * crit.size());
  s.text(20, 28, "verification suite", 16);
  for (std::size_t i = 0; i < crit.size(); ++i) {
    const auto& r = *crit[i];
    const double yy = 50 + 24.0 * i;
    const bool ok = r[cp] == "true";
    s.rect(20, yy, 56, 18, ok ? "#a1d99b" : "#fc9272");
    s.text(48, yy + 13, ok ? "PASS" : "FAIL", 11, "middle");
    s.text(86, yy + 13, r[cid] + " " + r[cname], 12);
    s.text(330, yy + 13, r[cnote], 11, "start", "#444");
  }
  return s.str();
}

std::string svg_series(const std::vector<std::vector<std::string>>& rows, const std::string& xcol,
                       const std::string& ycol, const std::string& title) {
  const auto& hd = rows[0];
  const auto cx = column(hd, xcol), cy = column(hd, ycol);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double a = cell(rows[i], cx), b = cell(rows[i], cy);
    if (std::isfinite(a) && std::isfinite(b)) pts.push_back({a, b});
  }
  if (pts.empty()) throw ConfigError("results.csv has no numeric rows to plot");
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (auto [a, b] : pts) {
    x0 = std::min(x0, a);
    x1 = std::max(x1, a);
    y0 = std::min(y0, b);
    y1 = std::max(y1, b);
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double left = 60, top = 40, pw = 700, ph = 300;
  Svg s(left + pw + 30, top + ph + 50);
  s.text(left, 24, title, 14);
  s.line(left, top + ph, left + pw, top + ph);
  s.line(left, top, left, top + ph);
  s.text(left - 6, top + 4, num(std::round(y1 * 100) / 100), 10, "end");
  s.text(left - 6, top + ph, num(std::round(y0 * 100) / 100), 10, "end");
  s.text(left, top + ph + 16, num(x0), 10, "middle");
  s.text(left + pw, top + ph + 16, num(x1), 10, "middle");
  std::ostringstream path;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double px = left + pw * (pts[i].first - x0) / (x1 - x0);
    const double py = top + ph * (y1 - pts[i].second) / (y1 - y0);
    path << (i ? " L " : "M ") << num(px) << " " << num(py);
  }
  s.body << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"#3182bd\" stroke-width=\"1.5\"/>\n";
  return s.str();
}

std::string svg_histogram(const std::vector<std::vector<std::string>>& rows, const std::string& col) {
  const auto c = column(rows[0], col);
  std::vector<double> v;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double x = cell(rows[i], c);
    if (std::isfinite(x)) v.push_back(x);
  }
  if (v.empty()) throw ConfigError("results.csv has no values in '" + col + "'");
  const double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end()) + 1e-9;
  const int bins = 30;
  std::vector<int> cnt(bins, 0);
  for (double x : v) cnt[std::min(bins - 1, static_cast<int>((x - lo) / (hi - lo) * bins))]++;
  const int top_count = *std::max_element(cnt.begin(), cnt.end());
  const double left = 50, top = 40, pw = 600, ph = 260;
  Svg s(left + pw + 30, top + ph + 50);
  s.text(left, 24, "histogram of " + col, 14);
  for (int b = 0; b < bins; ++b) {
    const double hgt = ph * cnt[b] / std::max(1, top_count);
    s.rect(left + pw * b / bins, top + ph - hgt, pw / bins - 1, hgt, "#9ecae1", "#08519c");
  }
  s.text(left, top + ph + 16, num(std::round(lo * 100) / 100), 10, "middle");
  s.text(left + pw, top + ph + 16, num(std::round(hi * 100) / 100), 10, "middle");
  return s.str();
}

std::string svg_table(const std::vector<std::vector<std::string>>& rows) {
  const std::size_t shown = std::min<std::size_t>(rows.size(), 41);
  Svg s(1000, 30 + 18.0 * shown);
  for (std::size_t i = 0; i < shown; ++i) {
    std::string line;
    for (std::size_t j = 0; j < rows[i].size(); ++j) line += (j ? " | " : "") + rows[i][j];
    s.text(10, 20 + 18.0 * i, line, 11, "start", i == 0 ? "#000" : "#333");
  }
  return s.str();
}

int cmd_report(const Context& ctx, const std::string& input, std::ostream& out) {
  const fs::path in = input.empty() ? ctx.out_dir / "results.csv" : fs::path(input);
  const auto rows = read_csv(in);
  if (rows.empty() || rows[0].empty()) throw ConfigError(in.string() + " is empty");
  const auto& hd = rows[0];
  std::string svg;
  if (has(hd, "p95_minus_p05")) svg = svg_tightness(rows);
  else if (has(hd, "criterion")) svg = svg_verify(rows);
  else if (has(hd, "W") && has(hd, "k")) svg = svg_series(rows, "k", "W", "environment path W_k");
  else if (has(hd, "centered")) svg = svg_histogram(rows, "centered");
  else svg = svg_table(rows);
  const fs::path dst = in.parent_path() / "report.svg";
  write_file(dst, svg);
  out << "wrote " << dst.string() << "\n";
  return 0;
}

}  // namespace

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) {
    if (c == '"') o += '"';
    o += c;
  }
  return o + "\"";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Branching random walk in random environment: simulation and verification"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Common common;
  std::string input;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "config file (sectioned key = value)");
    sub->add_option("--seed", common.seed, "seed; overrides global.seed");
    sub->add_option("--threads", common.threads, "worker threads; overrides global.threads");
    sub->add_option("--out", common.out, "output directory; overrides global.out_dir");
    sub->add_option("--set", common.sets, "section.key=value override, repeatable");
  };
  struct Sub {
    const char* name;
    const char* help;
  };
  const std::vector<Sub> subs = {{"env-sample", "sample an environment and its derived quantities"},
                                 {"barrier-prob", "barrier probability by the density engine"},
                                 {"simulate", "simulate M_n for the configured BRW"},
                                 {"tightness", "annealed tightness experiment"},
                                 {"verify-all", "run the verification suite"},
                                 {"report", "SVG summary of an existing results.csv"}};
  std::vector<CLI::App*> handles;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub);
    if (std::string(s.name) == "report") sub->add_option("--input", input, "results.csv to summarize");
    handles.push_back(sub);
  }
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    for (auto* h : handles)
      if (h->parsed()) {
        try {
          h->parse(std::vector<std::string>{});
        } catch (...) {
        }
      }
    err << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    const Context ctx = make_context(common);
    for (std::size_t i = 0; i < handles.size(); ++i) {
      if (!handles[i]->parsed()) continue;
      const std::string name = subs[i].name;
      if (name == "env-sample") return cmd_env_sample(ctx, out);
      if (name == "barrier-prob") return cmd_barrier_prob(ctx, out);
      if (name == "simulate") return cmd_simulate(ctx, out);
      if (name == "tightness") return cmd_tightness(ctx, out);
      if (name == "verify-all") return cmd_verify_all(ctx, out);
      if (name == "report") return cmd_report(ctx, input, out);
    }
    err << "error: no subcommand\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const StateError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace brwre::cli
