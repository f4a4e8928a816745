#pragma once

#include <string>

namespace brwre {

enum class CurveShape { Zero, NegBanana, PosBanana };

// h_t(s) = sign * scale * (((1+s) ^ (1+t-s))^exponent - 1), with t the curve
// horizon and ^ the minimum. Zero is h = 0.
struct Curve {
  CurveShape shape = CurveShape::Zero;
  double exponent = 1.0 / 6.0;
  double scale = 1.0;

  static Curve zero() { return {}; }
  static Curve neg_banana(double exponent = 1.0 / 6.0, double scale = 1.0) {
    return {CurveShape::NegBanana, exponent, scale};
  }
  static Curve pos_banana(double exponent = 1.0 / 6.0, double scale = 1.0) {
    return {CurveShape::PosBanana, exponent, scale};
  }

  double sign() const;
  double value(double s, double horizon) const;
  // Maximum and minimum of h over [a, b]; the curve is unimodal on [0, t].
  double max_on(double a, double b, double horizon) const;
  double min_on(double a, double b, double horizon) const;
  std::string name() const;
};

CurveShape parse_curve_shape(const std::string& s);

}  // namespace brwre
