#pragma once

#include <cstddef>
#include <vector>

namespace brwre {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double sum_compensated(const std::vector<double>& xs);

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

// Sample mean and standard error of the mean (n-1 variance).
MeanEstimate mean_stderr(const std::vector<double>& xs);

// Accumulates first and second moments with compensated sums. Merging in a
// fixed order keeps results independent of the thread count.
class MomentAccumulator {
 public:
  void add(double x);
  void merge(const MomentAccumulator& other);
  std::size_t count() const { return n_; }
  MeanEstimate estimate() const;

 private:
  std::size_t n_ = 0;
  CompensatedSum s1_;
  CompensatedSum s2_;
};

double normal_cdf(double x);
double normal_pdf(double x);
// log Phi(x), accurate in the far left tail.
double log_normal_cdf(double x);

// Linear-interpolation quantile (type 7). Sorts a copy.
double quantile(std::vector<double> xs, double q);
double quantile_sorted(const std::vector<double>& sorted, double q);

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b);
// Asymptotic critical value for level alpha in {0.10, 0.05, 0.01, 0.001}.
double ks_critical(std::size_t n, std::size_t m, double alpha);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace brwre
