#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brwre/curve.hpp"

namespace brwre {

enum class LawKind { Deterministic, UniformInt, Geometric, Categorical };

// Law of the i.i.d. offspring counts l_k. All support points must be >= 2.
//   Deterministic: l = value
//   UniformInt:    uniform on the integers {a, ..., b}
//   Geometric:     l = 2 + G, P(G = k) = p (1-p)^k
//   Categorical:   l = values[i] with probability probs[i]
struct OffspringLaw {
  LawKind kind = LawKind::Deterministic;
  int value = 2;
  int a = 2;
  int b = 3;
  double p = 0.5;
  std::vector<int> values;
  std::vector<double> probs;

  static OffspringLaw deterministic(int m);
  static OffspringLaw uniform_int(int a, int b);
  static OffspringLaw geometric(double p);
  static OffspringLaw categorical(std::vector<int> values, std::vector<double> probs);

  void validate() const;
  // E[log L] in closed form (a convergent series for Geometric).
  double mean_log() const;
  double theta_star() const;
  int sample(double u) const;
  std::string describe() const;
};

struct EnvConfig {
  OffspringLaw law;
  std::size_t length = 0;
};

class Environment {
 public:
  Environment(OffspringLaw law, std::vector<int> l);
  Environment(OffspringLaw law, std::vector<int> l, double theta_star);

  const OffspringLaw& law() const { return law_; }
  std::size_t length() const { return l_.size(); }
  double theta_star() const { return theta_; }
  // 1-indexed generations, k in [1, length].
  int l(std::size_t k) const;
  double kappa(std::size_t k) const;
  // K_0 = 0, K_k = kappa_1 + ... + kappa_k.
  double big_k(std::size_t k) const;
  // W_s = K_s / theta* - s theta*, linear between integers.
  double w_at(double s) const;
  double w_int(std::size_t k) const { return w_at(static_cast<double>(k)); }
  const std::vector<int>& counts() const { return l_; }

  // Environment (l_{offset+1}, l_{offset+2}, ...) with the same theta*.
  Environment slice(std::size_t offset) const;

 private:
  OffspringLaw law_;
  std::vector<int> l_;
  double theta_;
  std::vector<double> k_;
};

Environment sample_environment(const EnvConfig& cfg, std::uint64_t seed);

struct EnvConstants {
  double c_log = 1.0;
  double c1_curve = 1.0;
  double c2 = 0.0;
  double log_c2 = 0.0;
  double c3 = 0.0;
  double c1_lambda = 4.0;
  double gamma = 0.0;
};

// Constants over [0, t] for the curve h at horizon t. lambda and gamma feed
// c1 = sqrt(8(lambda+1)) and C3.
EnvConstants env_constants(const Environment& env, const Curve& h, double t,
                           double lambda, double gamma);

double c_log_of(const Environment& env, double t);
double c1_of(const Curve& h, double t);

}  // namespace brwre
