#pragma once

#include <cstddef>
#include <vector>

#include "brwre/barrier.hpp"
#include "brwre/env.hpp"

namespace brwre {

struct CenteringRecord {
  std::size_t n = 0;
  double big_k = 0.0;
  double log_p_n = 0.0;
  double m_n = 0.0;
  // |m_n(dx) - m_n(dx/2)| when refinement was requested, else 0.
  double grid_delta = 0.0;
};

// m_n = (K_n + log p_n) / theta*, with p_n started at xi0.
CenteringRecord m_n(const Environment& env, std::size_t n, double xi0, const GridConfig& grid,
                    bool refine = false);
// One forward pass for every n in ns.
std::vector<CenteringRecord> m_n_sequence(const Environment& env, const std::vector<std::size_t>& ns,
                                          double xi0, const GridConfig& grid, bool refine = false);
// m_n of the environment (l_{offset+1}, l_{offset+2}, ...).
CenteringRecord m_n_shifted(const Environment& env, std::size_t n, std::size_t offset, double xi0,
                            const GridConfig& grid);

}  // namespace brwre
