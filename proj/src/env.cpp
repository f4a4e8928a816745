#include "brwre/env.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "brwre/errors.hpp"
#include "brwre/rng.hpp"

namespace brwre {

double Curve::sign() const {
  switch (shape) {
    case CurveShape::NegBanana: return -1.0;
    case CurveShape::PosBanana: return 1.0;
    default: return 0.0;
  }
}

double Curve::value(double s, double horizon) const {
  if (shape == CurveShape::Zero) return 0.0;
  const double m = std::min(1.0 + s, 1.0 + horizon - s);
  return sign() * scale * (std::pow(m, exponent) - 1.0);
}

double Curve::max_on(double a, double b, double horizon) const {
  if (shape == CurveShape::Zero) return 0.0;
  const double mid = 0.5 * horizon;
  double best = std::max(value(a, horizon), value(b, horizon));
  if (a <= mid && mid <= b) best = std::max(best, value(mid, horizon));
  return best;
}

double Curve::min_on(double a, double b, double horizon) const {
  if (shape == CurveShape::Zero) return 0.0;
  const double mid = 0.5 * horizon;
  double best = std::min(value(a, horizon), value(b, horizon));
  if (a <= mid && mid <= b) best = std::min(best, value(mid, horizon));
  return best;
}

std::string Curve::name() const {
  switch (shape) {
    case CurveShape::NegBanana: return "neg_banana";
    case CurveShape::PosBanana: return "pos_banana";
    default: return "zero";
  }
}

CurveShape parse_curve_shape(const std::string& s) {
  if (s == "zero") return CurveShape::Zero;
  if (s == "neg_banana") return CurveShape::NegBanana;
  if (s == "pos_banana") return CurveShape::PosBanana;
  throw ConfigError("unknown curve '" + s + "' (expected zero, neg_banana, pos_banana)");
}

OffspringLaw OffspringLaw::deterministic(int m) {
  OffspringLaw law;
  law.kind = LawKind::Deterministic;
  law.value = m;
  law.validate();
  return law;
}

OffspringLaw OffspringLaw::uniform_int(int a, int b) {
  OffspringLaw law;
  law.kind = LawKind::UniformInt;
  law.a = a;
  law.b = b;
  law.validate();
  return law;
}

OffspringLaw OffspringLaw::geometric(double p) {
  OffspringLaw law;
  law.kind = LawKind::Geometric;
  law.p = p;
  law.validate();
  return law;
}

OffspringLaw OffspringLaw::categorical(std::vector<int> values, std::vector<double> probs) {
  OffspringLaw law;
  law.kind = LawKind::Categorical;
  law.values = std::move(values);
  law.probs = std::move(probs);
  law.validate();
  return law;
}

void OffspringLaw::validate() const {
  switch (kind) {
    case LawKind::Deterministic:
      if (value < 2) throw ConfigError("deterministic offspring count must be >= 2");
      break;
    case LawKind::UniformInt:
      if (a < 2) throw ConfigError("uniform_int lower bound must be >= 2");
      if (b < a) throw ConfigError("uniform_int requires a <= b");
      break;
    case LawKind::Geometric:
      if (!(p > 0.0 && p <= 1.0)) throw ConfigError("geometric p must lie in (0, 1]");
      break;
    case LawKind::Categorical: {
      if (values.empty() || values.size() != probs.size())
        throw ConfigError("categorical law needs matching non-empty values and probs");
      double total = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < 2) throw ConfigError("categorical support point below 2");
        if (!(probs[i] >= 0.0)) throw ConfigError("categorical probability must be >= 0");
        total += probs[i];
      }
      if (std::fabs(total - 1.0) > 1e-9) throw ConfigError("categorical probabilities must sum to 1");
      break;
    }
  }
}

double OffspringLaw::mean_log() const {
  switch (kind) {
    case LawKind::Deterministic:
      return std::log(static_cast<double>(value));
    case LawKind::UniformInt: {
      double s = 0.0;
      for (int i = a; i <= b; ++i) s += std::log(static_cast<double>(i));
      return s / static_cast<double>(b - a + 1);
    }
    case LawKind::Geometric: {
      if (p == 1.0) return std::log(2.0);
      double s = 0.0, w = p;
      for (int k = 0; k < 100000; ++k) {
        const double term = w * std::log(2.0 + k);
        s += term;
        if (term < 1e-18 * s && k > 10) break;
        w *= (1.0 - p);
      }
      return s;
    }
    case LawKind::Categorical: {
      double s = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i)
        s += probs[i] * std::log(static_cast<double>(values[i]));
      return s;
    }
  }
  return 0.0;
}

double OffspringLaw::theta_star() const { return std::sqrt(2.0 * mean_log()); }

int OffspringLaw::sample(double u) const {
  switch (kind) {
    case LawKind::Deterministic:
      return value;
    case LawKind::UniformInt: {
      const int span = b - a + 1;
      const int k = std::min(span - 1, static_cast<int>(u * span));
      return a + k;
    }
    case LawKind::Geometric: {
      if (p == 1.0) return 2;
      const double g = std::floor(std::log1p(-u) / std::log1p(-p));
      return 2 + static_cast<int>(std::min(g, 1e9));
    }
    case LawKind::Categorical: {
      double c = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        c += probs[i];
        if (u < c) return values[i];
      }
      return values.back();
    }
  }
  return 2;
}

std::string OffspringLaw::describe() const {
  std::ostringstream os;
  switch (kind) {
    case LawKind::Deterministic: os << "deterministic(" << value << ")"; break;
    case LawKind::UniformInt: os << "uniform_int(" << a << "," << b << ")"; break;
    case LawKind::Geometric: os << "geometric(" << p << ")"; break;
    case LawKind::Categorical:
      os << "categorical(";
      for (std::size_t i = 0; i < values.size(); ++i)
        os << (i ? ";" : "") << values[i] << ":" << probs[i];
      os << ")";
      break;
  }
  return os.str();
}

Environment::Environment(OffspringLaw law, std::vector<int> l)
    : Environment(law, std::move(l), law.theta_star()) {}

Environment::Environment(OffspringLaw law, std::vector<int> l, double theta_star)
    : law_(std::move(law)), l_(std::move(l)), theta_(theta_star) {
  if (!(theta_ > 0.0)) throw ConfigError("theta* must be positive");
  k_.assign(l_.size() + 1, 0.0);
  const double half = 0.5 * theta_ * theta_;
  for (std::size_t k = 0; k < l_.size(); ++k) {
    if (l_[k] < 2) throw ConfigError("offspring count below 2");
    k_[k + 1] = k_[k] + std::log(static_cast<double>(l_[k])) + half;
  }
}

int Environment::l(std::size_t k) const {
  if (k < 1 || k > l_.size()) throw RangeError("generation index out of range");
  return l_[k - 1];
}

double Environment::kappa(std::size_t k) const {
  return std::log(static_cast<double>(l(k))) + 0.5 * theta_ * theta_;
}

double Environment::big_k(std::size_t k) const {
  if (k > l_.size()) throw RangeError("K_k requested beyond environment length");
  return k_[k];
}

double Environment::w_at(double s) const {
  if (!(s >= 0.0) || s > static_cast<double>(l_.size()) + 1e-12)
    throw RangeError("W_s requested outside [0, n]");
  const auto k = std::min(static_cast<std::size_t>(std::floor(s)), l_.size());
  const double wk = k_[k] / theta_ - static_cast<double>(k) * theta_;
  if (k == l_.size()) return wk;
  const double wk1 = k_[k + 1] / theta_ - static_cast<double>(k + 1) * theta_;
  return wk + (s - static_cast<double>(k)) * (wk1 - wk);
}

Environment Environment::slice(std::size_t offset) const {
  if (offset > l_.size()) throw RangeError("slice offset beyond environment length");
  return Environment(law_, std::vector<int>(l_.begin() + static_cast<long>(offset), l_.end()), theta_);
}

Environment sample_environment(const EnvConfig& cfg, std::uint64_t seed) {
  cfg.law.validate();
  if (cfg.length == 0) throw ConfigError("environment length must be positive");
  const Stream st(derive_key("env", seed));
  std::vector<int> l(cfg.length);
  for (std::size_t k = 0; k < cfg.length; ++k) l[k] = cfg.law.sample(st.uniform(k));
  return Environment(cfg.law, std::move(l));
}

namespace {

template <class F>
double golden_max(F f, double a, double b) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
    if (fc > fd) {
      b = d; d = c; fd = fc; c = b - r * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd; d = a + r * (b - a); fd = f(d);
    }
  }
  return std::max(fc, fd);
}

// Sampled scan plus a golden-section refinement around each sample peak.
template <class F>
double maximize(F f, double a, double b, int samples) {
  if (b <= a) return f(a);
  double best = std::max(f(a), f(b));
  const double h = (b - a) / samples;
  std::vector<double> v(samples + 1);
  for (int i = 0; i <= samples; ++i) v[i] = f(a + h * i);
  for (int i = 0; i <= samples; ++i) {
    best = std::max(best, v[i]);
    const bool peak = (i == 0 || v[i] >= v[i - 1]) && (i == samples || v[i] >= v[i + 1]);
    if (peak) {
      const double lo = std::max(a, a + h * (i - 1)), hi = std::min(b, a + h * (i + 1));
      best = std::max(best, golden_max(f, lo, hi));
    }
  }
  return best;
}

}  // namespace

double c_log_of(const Environment& env, double t) {
  const double e = std::exp(1.0);
  if (t <= e) return 1.0;
  if (t > static_cast<double>(env.length())) throw RangeError("C_log horizon beyond environment");
  auto ratio = [&](double s) { return std::fabs(env.w_at(s)) / std::sqrt(s * std::log(s)); };
  double best = 1.0;
  double a = e;
  while (a < t) {
    const double b = std::min(t, std::floor(a) + 1.0);
    best = std::max(best, maximize(ratio, a, b, 4));
    a = b;
  }
  return best;
}

double c1_of(const Curve& h, double t) {
  if (h.shape == CurveShape::Zero) return 1.0;
  auto ratio = [&](double s) { return std::fabs(h.value(s, t)) / std::sqrt(1.0 + s); };
  return std::max(1.0, maximize(ratio, 0.0, t, 256));
}

EnvConstants env_constants(const Environment& env, const Curve& h, double t,
                           double lambda, double gamma) {
  if (lambda <= 0.0) throw ConfigError("lambda must be positive");
  EnvConstants c;
  c.c_log = c_log_of(env, t);
  c.c1_curve = c1_of(h, t);
  c.gamma = gamma;
  const double a = c.c1_curve, l = c.c_log;
  c.log_c2 = -(128.0 + 16.0 * a * a + 80.0 * l * l + 134.0 * a + 96.0 * l + 32.0 * a * l);
  c.c2 = std::exp(c.log_c2);
  c.c1_lambda = std::sqrt(8.0 * (lambda + 1.0));
  c.c3 = std::max({48.0, 128.0 * l * l, 64.0 * std::sqrt(3.0) * a,
                   std::pow(32.0 * gamma + 128.0, 4.0), 5.0 * c.c1_lambda, 96.0 * l});
  return c;
}

}  // namespace brwre
