#include "brwre/centering.hpp"

#include <cmath>

#include "brwre/errors.hpp"

namespace brwre {

std::vector<CenteringRecord> m_n_sequence(const Environment& env, const std::vector<std::size_t>& ns,
                                          double xi0, const GridConfig& grid, bool refine) {
  const std::vector<double> lp = log_p_n_sequence(env, ns, xi0, grid);
  std::vector<double> lp_fine;
  if (refine) {
    GridConfig fine = grid;
    fine.dx = 0.5 * grid.dx;
    lp_fine = log_p_n_sequence(env, ns, xi0, fine);
  }
  const double th = env.theta_star();
  std::vector<CenteringRecord> out;
  out.reserve(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    CenteringRecord r;
    r.n = ns[i];
    r.big_k = env.big_k(ns[i]);
    r.log_p_n = lp[i];
    r.m_n = (r.big_k + r.log_p_n) / th;
    if (refine) r.grid_delta = std::fabs(lp[i] - lp_fine[i]) / th;
    out.push_back(r);
  }
  return out;
}

CenteringRecord m_n(const Environment& env, std::size_t n, double xi0, const GridConfig& grid,
                    bool refine) {
  return m_n_sequence(env, {n}, xi0, grid, refine)[0];
}

CenteringRecord m_n_shifted(const Environment& env, std::size_t n, std::size_t offset, double xi0,
                            const GridConfig& grid) {
  if (offset + n > env.length()) throw RangeError("shifted centering runs past the environment");
  return m_n(env.slice(offset), n, xi0, grid);
}

}  // namespace brwre
