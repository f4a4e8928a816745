#include "brwre/stats.hpp"

#include <algorithm>
#include <cmath>

#include "brwre/errors.hpp"

namespace brwre {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::fabs(sum_) >= std::fabs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

double sum_compensated(const std::vector<double>& xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

MeanEstimate mean_stderr(const std::vector<double>& xs) {
  MomentAccumulator acc;
  for (double x : xs) acc.add(x);
  return acc.estimate();
}

void MomentAccumulator::add(double x) {
  ++n_;
  s1_.add(x);
  s2_.add(x * x);
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  n_ += other.n_;
  s1_.add(other.s1_.value());
  s2_.add(other.s2_.value());
}

MeanEstimate MomentAccumulator::estimate() const {
  MeanEstimate e;
  e.n = n_;
  if (n_ == 0) return e;
  const double n = static_cast<double>(n_);
  e.mean = s1_.value() / n;
  if (n_ > 1) {
    const double var = std::max(0.0, (s2_.value() - n * e.mean * e.mean) / (n - 1.0));
    e.stderr_ = std::sqrt(var / n);
  }
  return e;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

double log_normal_cdf(double x) {
  if (x > -20.0) return std::log(normal_cdf(x));
  // Asymptotic series for the Mills ratio.
  const double x2 = x * x;
  double series = 1.0, term = 1.0;
  for (int k = 1; k < 8; ++k) {
    term *= -(2.0 * k - 1.0) / x2;
    series += term;
  }
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * M_PI) + std::log(series);
}

double quantile_sorted(const std::vector<double>& s, double q) {
  if (s.empty()) throw DomainError("quantile of empty sample");
  if (q <= 0.0) return s.front();
  if (q >= 1.0) return s.back();
  const double h = (static_cast<double>(s.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

double quantile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  return quantile_sorted(xs, q);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical(std::size_t n, std::size_t m, double alpha) {
  double c;
  if (alpha >= 0.10) c = 1.224;
  else if (alpha >= 0.05) c = 1.358;
  else if (alpha >= 0.01) c = 1.628;
  else c = 1.949;
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("least_squares: need >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = sum_compensated(x) / n;
  const double my = sum_compensated(y) / n;
  CompensatedSum sxy, sxx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy.add((x[i] - mx) * (y[i] - my));
    sxx.add((x[i] - mx) * (x[i] - mx));
  }
  if (sxx.value() <= 0.0) throw DomainError("least_squares: degenerate abscissae");
  LineFit f;
  f.slope = sxy.value() / sxx.value();
  f.intercept = my - f.slope * mx;
  return f;
}

}  // namespace brwre
