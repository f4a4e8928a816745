#include "brwre/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <map>
#include <memory>
#include <mutex>

namespace brwre {

namespace {

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

// FFTW planning is not thread-safe; execution with new-array calls is.
std::mutex g_plan_mu;

const PlanPair& plans_for(std::size_t n) {
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard<std::mutex> lk(g_plan_mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  double* r = fftw_alloc_real(n);
  fftw_complex* c = fftw_alloc_complex(n / 2 + 1);
  PlanPair p;
  p.fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), r, c, FFTW_ESTIMATE);
  p.inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), c, r, FFTW_ESTIMATE);
  fftw_free(r);
  fftw_free(c);
  return cache.emplace(n, p).first->second;
}

struct RealBuf {
  explicit RealBuf(std::size_t n) : p(fftw_alloc_real(n)) { std::fill(p, p + n, 0.0); }
  ~RealBuf() { fftw_free(p); }
  RealBuf(const RealBuf&) = delete;
  RealBuf& operator=(const RealBuf&) = delete;
  double* p;
};

struct ComplexBuf {
  explicit ComplexBuf(std::size_t n) : p(fftw_alloc_complex(n)) {}
  ~ComplexBuf() { fftw_free(p); }
  ComplexBuf(const ComplexBuf&) = delete;
  ComplexBuf& operator=(const ComplexBuf&) = delete;
  fftw_complex* p;
};

std::size_t fft_size(std::size_t n) {
  std::size_t s = 64;
  while (s < n) s <<= 1;
  return s;
}

std::vector<double> convolve_fft(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t full = a.size() + b.size() - 1;
  const std::size_t n = fft_size(full);
  const PlanPair& pl = plans_for(n);
  RealBuf ra(n), rb(n);
  std::copy(a.begin(), a.end(), ra.p);
  std::copy(b.begin(), b.end(), rb.p);
  ComplexBuf ca(n / 2 + 1), cb(n / 2 + 1);
  fftw_execute_dft_r2c(pl.fwd, ra.p, ca.p);
  fftw_execute_dft_r2c(pl.fwd, rb.p, cb.p);
  for (std::size_t k = 0; k < n / 2 + 1; ++k) {
    const double re = ca.p[k][0] * cb.p[k][0] - ca.p[k][1] * cb.p[k][1];
    const double im = ca.p[k][0] * cb.p[k][1] + ca.p[k][1] * cb.p[k][0];
    ca.p[k][0] = re;
    ca.p[k][1] = im;
  }
  fftw_execute_dft_c2r(pl.inv, ca.p, ra.p);
  std::vector<double> out(full);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < full; ++i) out[i] = ra.p[i] * inv_n;
  return out;
}

}  // namespace

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {};
  if (a.size() * b.size() <= 40000) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
  }
  return convolve_fft(a, b);
}

std::vector<double> correlate(const std::vector<double>& a,
                              const std::vector<double>& kernel, long lag_lo,
                              std::size_t out_size) {
  std::vector<double> out(out_size, 0.0);
  if (a.empty() || kernel.empty() || out_size == 0) return out;
  const long lag_hi = lag_lo + static_cast<long>(kernel.size()) - 1;
  // Reverse the kernel so that conv[p] with p = j + lag_hi is the answer.
  std::vector<double> rk(kernel.rbegin(), kernel.rend());
  const std::vector<double> c = convolve(a, rk);
  for (std::size_t j = 0; j < out_size; ++j) {
    const long p = static_cast<long>(j) + lag_hi;
    if (p >= 0 && p < static_cast<long>(c.size())) out[j] = c[static_cast<std::size_t>(p)];
  }
  return out;
}

}  // namespace brwre
