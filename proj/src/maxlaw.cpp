#include "brwre/maxlaw.hpp"

#include <algorithm>
#include <cmath>

#include "brwre/errors.hpp"
#include "brwre/fft.hpp"
#include "brwre/stats.hpp"

namespace brwre {

MaxLawTable::MaxLawTable(const Environment& env, std::size_t n, double dx, double below,
                         double above)
    : n_(n), dx_(dx) {
  if (n == 0) throw ConfigError("max-law table needs n >= 1");
  if (n > env.length()) throw RangeError("max-law horizon exceeds environment length");
  if (!(dx > 0.0 && dx <= 0.1)) throw ConfigError("max-law spacing must lie in (0, 0.1]");
  const double th = env.theta_star();
  const auto size = static_cast<std::size_t>(std::ceil((below + above) / dx)) + 1;
  lo_.assign(n, 0.0);
  q_.assign(n, {});
  for (std::size_t k = 0; k < n; ++k) {
    const double c = (env.big_k(n) - env.big_k(k)) / th -
                     1.5 / th * std::log(1.0 + static_cast<double>(n - k));
    lo_[k] = std::floor((c - below) / dx) * dx;
  }

  // Q_{n-1} = Phi^{l_n} exactly.
  {
    auto& q = q_[n - 1];
    q.resize(size);
    const double l = env.l(n);
    for (std::size_t i = 0; i < size; ++i)
      q[i] = std::exp(l * log_normal_cdf(lo_[n - 1] + static_cast<double>(i) * dx));
  }

  constexpr double kReach = 9.0;
  for (std::size_t kk = n - 1; kk-- > 0;) {
    const auto& qn = q_[kk + 1];
    const double lo_in = lo_[kk + 1];
    // Cell masses of the next law, centred between nodes; the left remainder
    // sits half a cell below node 0.
    std::vector<double> p(size + 1);
    p[0] = qn[0];
    for (std::size_t i = 1; i < size; ++i) p[i] = std::max(0.0, qn[i] - qn[i - 1]);
    p[size] = std::max(0.0, 1.0 - qn[size - 1]);
    // Mass i sits at lo_in + (i - 0.5) dx for i in [0, size].
    const double d = lo_[kk] - lo_in + 0.5 * dx;
    // x'_j - c_i = d + (j - i) dx; lag m = i - j gives Phi(d - m dx).
    const long m_lo = static_cast<long>(std::ceil((d - kReach) / dx));
    const long m_hi = static_cast<long>(std::floor((d + kReach) / dx));
    std::vector<double> kernel(static_cast<std::size_t>(m_hi - m_lo + 1));
    for (long m = m_lo; m <= m_hi; ++m)
      kernel[static_cast<std::size_t>(m - m_lo)] = normal_cdf(d - static_cast<double>(m) * dx);
    std::vector<double> f = correlate(p, kernel, m_lo, size);
    // Masses with lag below m_lo contribute Phi = 1.
    std::vector<double> prefix(p.size() + 1, 0.0);
    CompensatedSum run;
    for (std::size_t i = 0; i < p.size(); ++i) {
      run.add(p[i]);
      prefix[i + 1] = run.value();
    }
    auto& q = q_[kk];
    q.resize(size);
    const double l = env.l(kk + 1);
    double prev = 0.0;
    for (std::size_t j = 0; j < size; ++j) {
      const long upto = static_cast<long>(j) + m_lo;  // i < upto have full weight
      double full = 0.0;
      if (upto > 0) full = prefix[static_cast<std::size_t>(std::min<long>(upto, static_cast<long>(p.size())))];
      const double fj = std::clamp(f[j] + full, 0.0, 1.0);
      const double v = fj > 0.0 ? std::exp(l * std::log(fj)) : 0.0;
      prev = std::max(prev, v);
      q[j] = prev;
    }
  }
}

double MaxLawTable::hi(std::size_t k) const {
  return lo_[k] + static_cast<double>(q_[k].size() - 1) * dx_;
}

double MaxLawTable::cdf(std::size_t k, double x) const {
  if (k >= n_) return x >= 0.0 ? 1.0 : 0.0;
  const auto& q = q_[k];
  const double pos = (x - lo_[k]) / dx_;
  if (pos <= 0.0) return pos == 0.0 ? q[0] : 0.0;
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= q.size()) return 1.0;
  const double w = pos - static_cast<double>(i);
  return q[i] + w * (q[i + 1] - q[i]);
}

double MaxLawTable::quantile(std::size_t k, double u, bool* clipped) const {
  if (k >= n_) return 0.0;
  const auto& q = q_[k];
  if (u <= q.front() || u > q.back()) {
    if (clipped) *clipped = true;
    return u <= q.front() ? lo_[k] : hi(k);
  }
  const auto it = std::lower_bound(q.begin(), q.end(), u);
  const auto i = static_cast<std::size_t>(it - q.begin());
  const double q0 = q[i - 1], q1 = q[i];
  const double w = q1 > q0 ? (u - q0) / (q1 - q0) : 0.5;
  return lo_[k] + (static_cast<double>(i - 1) + w) * dx_;
}

double MaxLawTable::mean_of_max() const {
  const auto& q = q_[0];
  CompensatedSum s;
  s.add(lo_[0] * q[0]);
  for (std::size_t i = 1; i < q.size(); ++i)
    s.add((lo_[0] + (static_cast<double>(i) - 0.5) * dx_) * (q[i] - q[i - 1]));
  s.add(hi(0) * (1.0 - q.back()));
  return s.value();
}

}  // namespace brwre
