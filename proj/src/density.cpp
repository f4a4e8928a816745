#include "brwre/density.hpp"

#include <algorithm>
#include <cmath>

#include "brwre/errors.hpp"
#include "brwre/fft.hpp"
#include "brwre/stats.hpp"

namespace brwre {

DensityGrid DensityGrid::point(double x, double dx) {
  if (!(dx > 0.0)) throw ConfigError("grid spacing must be positive");
  DensityGrid g;
  g.x_top = x;
  g.dx = dx;
  g.mass = {1.0};
  g.atom = true;
  return g;
}

double DensityGrid::total() const { return sum_compensated(mass); }

double DensityGrid::log_total() const {
  const double t = total();
  return t > 0.0 ? std::log(t) + log_scale : -INFINITY;
}

double DensityGrid::node_weight(std::size_t i) const {
  if (!closed_top) return 1.0;
  switch (i) {
    case 0: return 3.0 / 8.0;
    case 1: return 7.0 / 6.0;
    case 2: return 23.0 / 24.0;
    default: return 1.0;
  }
}

double DensityGrid::window_mass(double a, double b) const {
  if (mass.empty() || b < a) return 0.0;
  if (atom) return (x_top >= a && x_top <= b) ? mass[0] : 0.0;
  const long n = static_cast<long>(mass.size());
  if (n == 1) return 0.0;
  // Gauss-Legendre 3-point rule, exact for the cubic on each piece.
  static const double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  CompensatedSum s;
  for (long i = 0; i + 1 < n; ++i) {
    const double q = x(static_cast<std::size_t>(i)), p = x(static_cast<std::size_t>(i + 1));
    const double lo = std::max(a, p), hi = std::min(b, q);
    if (hi <= lo) continue;
    // Up to four nodes around the segment, shifted inwards at the ends.
    long first = std::max(0L, i - 1);
    long last = std::min(n - 1, first + 3);
    first = std::max(0L, last - 3);
    double piece = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double xe = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx[k];
      double val = 0.0;
      for (long m = first; m <= last; ++m) {
        double basis = 1.0;
        const double xm = x(static_cast<std::size_t>(m));
        for (long r = first; r <= last; ++r)
          if (r != m) basis *= (xe - x(static_cast<std::size_t>(r))) / (xm - x(static_cast<std::size_t>(r)));
        val += basis * density(static_cast<std::size_t>(m));
      }
      piece += gw[k] * val;
    }
    s.add(0.5 * (hi - lo) * piece);
  }
  return s.value();
}

void DensityGrid::renormalize() {
  const double t = total();
  if (!(t > 0.0)) return;
  if (t < 1e-30 || t > 1e30) {
    for (double& m : mass) m /= t;
    log_scale += std::log(t);
  }
}

DensityGrid truncate_at_zero(const DensityGrid& g) {
  DensityGrid out = g;
  if (g.mass.empty()) return out;
  if (g.atom) {
    if (g.x_top > 0.0) out.mass.clear();
    return out;
  }
  const double eps = 1e-9 * g.dx;
  std::size_t first = 0;
  while (first < g.mass.size() && g.x(first) > eps) ++first;
  out.mass.assign(g.mass.begin() + static_cast<long>(first), g.mass.end());
  if (out.mass.empty()) return out;
  out.x_top = g.x(first);
  if (std::fabs(out.x_top) <= eps) {
    if (!g.closed_top || first > 0) {
      for (std::size_t i = 0; i < out.mass.size(); ++i) out.mass[i] = g.density(first + i) * g.dx;
      out.x_top = 0.0;
      out.closed_top = true;
      for (std::size_t i = 0; i < std::min<std::size_t>(3, out.mass.size()); ++i)
        out.mass[i] *= out.node_weight(i);
    }
  } else {
    out.closed_top = false;
  }
  return out;
}

namespace {

void trim_tails(DensityGrid& g, double tol, bool trim_top) {
  if (g.mass.empty()) return;
  const double t = g.total();
  if (!(t > 0.0)) {
    g.mass.clear();
    return;
  }
  const double cut = tol * t;
  std::size_t hi = g.mass.size();
  double acc = 0.0;
  while (hi > 1 && acc + g.mass[hi - 1] < cut) acc += g.mass[--hi];
  std::size_t lo = 0;
  if (trim_top) {
    acc = 0.0;
    while (lo + 1 < hi && acc + g.mass[lo] < cut) acc += g.mass[lo++];
  }
  if (lo > 0 || hi < g.mass.size()) {
    const double new_top = g.x(lo);
    g.mass = std::vector<double>(g.mass.begin() + static_cast<long>(lo),
                                 g.mass.begin() + static_cast<long>(hi));
    g.x_top = new_top;
  }
}

}  // namespace

DensityGrid propagate_step(const DensityGrid& g_in, double d, double var, StepMode mode,
                           const PropagationConfig& pc) {
  if (!(var > 0.0)) throw DomainError("propagate_step: variance must be positive");
  const double sigma = std::sqrt(var);
  if (g_in.dx > 0.1 * sigma * (1.0 + 1e-9))
    throw DomainError("propagate_step: grid spacing exceeds 0.1 step standard deviations");

  const DensityGrid g = (mode == StepMode::Free) ? g_in : truncate_at_zero(g_in);
  DensityGrid out;
  out.dx = g.dx;
  out.log_scale = g.log_scale;
  if (g.mass.empty()) return out;

  const double dx = g.dx;
  const double reach = pc.reach_sigmas * sigma;
  double top;
  if (mode == StepMode::Free) {
    top = std::ceil((g.x_top + d + reach) / dx) * dx;
  } else {
    top = 0.0;
    if (g.x_top + d - reach > 0.0) return out;
  }
  const double bottom = g.x_bottom() + d - reach;
  if (bottom > top) return out;
  const auto n_out = static_cast<std::size_t>(std::floor((top - bottom) / dx)) + 1;

  const double delta = top - g.x_top - d;
  const long m_lo = static_cast<long>(std::ceil((-reach - delta) / dx));
  const long m_hi = static_cast<long>(std::floor((reach - delta) / dx));
  std::vector<double> kernel(static_cast<std::size_t>(std::max(0L, m_hi - m_lo + 1)));
  const double norm = dx / (sigma * std::sqrt(2.0 * M_PI));
  for (long m = m_lo; m <= m_hi; ++m) {
    const double z = (delta + static_cast<double>(m) * dx) / sigma;
    kernel[static_cast<std::size_t>(m - m_lo)] = norm * std::exp(-0.5 * z * z);
  }

  out.x_top = top;
  out.mass = correlate(g.mass, kernel, m_lo, n_out);

  if (mode == StepMode::Continuous) {
    const long n_in = static_cast<long>(g.mass.size());
    for (std::size_t j = 0; j < n_out; ++j) {
      const double xj = -static_cast<double>(j) * dx;
      long i_lo = std::max(0L, static_cast<long>(j) + m_lo);
      long i_hi = std::min(n_in - 1, static_cast<long>(j) + m_hi);
      if (j > 0) {
        const double lim = pc.band_exponent * var / (2.0 * (-xj)) + g.x_top;
        const long band_hi = static_cast<long>(std::floor(lim / dx));
        if (band_hi < static_cast<long>(j) + m_lo || band_hi < 0) break;
        i_hi = std::min(i_hi, band_hi);
      }
      if (i_hi < i_lo) continue;
      double r = 0.0;
      for (long i = i_lo; i <= i_hi; ++i) {
        const double xi = g.x(static_cast<std::size_t>(i));
        r += g.mass[static_cast<std::size_t>(i)] *
             kernel[static_cast<std::size_t>(i - static_cast<long>(j) - m_lo)] *
             std::exp(-2.0 * xi * xj / var);
      }
      out.mass[j] -= r;
    }
  }
  double peak = 0.0;
  for (double m : out.mass) peak = std::max(peak, m);
  const double floor = pc.floor_rel * peak;
  for (double& m : out.mass) m = m > floor ? m : 0.0;
  if (mode != StepMode::Free) {
    out.closed_top = true;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, out.mass.size()); ++i)
      out.mass[i] *= out.node_weight(i);
    if (mode == StepMode::Continuous) out.mass[0] = 0.0;
  }
  trim_tails(out, pc.tail_tol, mode == StepMode::Free);
  out.renormalize();
  return out;
}

DensityGrid propagate_step(const DensityGrid& g, double drift, double barrier_now,
                           double barrier_next, double var, const PropagationConfig& pc) {
  if (!std::isfinite(barrier_now) && !std::isfinite(barrier_next))
    return propagate_step(g, drift, var, StepMode::Free, pc);
  if (!std::isfinite(barrier_now) || !std::isfinite(barrier_next))
    throw DomainError("propagate_step: barrier must be finite at both ends or at neither");
  return propagate_step(g, drift - (barrier_next - barrier_now), var, StepMode::Continuous, pc);
}

}  // namespace brwre
