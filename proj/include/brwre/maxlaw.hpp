#pragma once

#include <cstddef>
#include <vector>

#include "brwre/env.hpp"

namespace brwre {

// Quenched law of the generation-n maximum of the subtree below a particle
// at generation k, relative to that particle:
//   Q_n(x) = 1{x >= 0},  Q_k(x) = [(phi * Q_{k+1})(x)]^{l_{k+1}}.
// Tabulated for k = 0..n-1 on lattices of spacing dx around the subtree's
// first-order centering. Q_0 is the law of M_n.
class MaxLawTable {
 public:
  MaxLawTable(const Environment& env, std::size_t n, double dx = 0.02,
              double below = 30.0, double above = 50.0);

  std::size_t horizon() const { return n_; }
  double cdf(std::size_t k, double x) const;
  // x with Q_k(x) = u by linear interpolation; sets *clipped when u lies
  // outside the tabulated range.
  double quantile(std::size_t k, double u, bool* clipped = nullptr) const;
  double lo(std::size_t k) const { return lo_[k]; }
  double hi(std::size_t k) const;
  double dx() const { return dx_; }
  const std::vector<double>& values(std::size_t k) const { return q_[k]; }
  // Mean of Q_0 from the table.
  double mean_of_max() const;

 private:
  std::size_t n_;
  double dx_;
  std::vector<double> lo_;
  std::vector<std::vector<double>> q_;
};

}  // namespace brwre
