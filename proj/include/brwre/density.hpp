#pragma once

#include <cstddef>
#include <vector>

namespace brwre {

// Sub-probability measure on the lattice x_i = x_top - i*dx, i = 0..N-1,
// stored as cell masses. Masses are kept in units of exp(log_scale).
struct DensityGrid {
  double x_top = 0.0;
  double dx = 0.02;
  std::vector<double> mass;
  double log_scale = 0.0;
  // A single atom at x_top rather than a sampled density.
  bool atom = false;
  // x_top == 0 is the barrier; the first three masses carry Gregory end
  // weights 3/8, 7/6, 23/24 instead of whole cells.
  bool closed_top = false;

  static DensityGrid point(double x, double dx);

  double x(std::size_t i) const { return x_top - static_cast<double>(i) * dx; }
  double node_weight(std::size_t i) const;
  // Density value at node i.
  double density(std::size_t i) const { return mass[i] / (dx * node_weight(i)); }
  std::size_t size() const { return mass.size(); }
  double x_bottom() const { return x(mass.size() - 1); }
  double total() const;
  double log_total() const;
  // Mass in [a, b] from the local cubic interpolant of the node densities.
  double window_mass(double a, double b) const;
  // Folds the scale back when it drifts; keeps masses O(1).
  void renormalize();
};

enum class StepMode {
  Free,        // no barrier on this step
  Discrete,    // paths above 0 at the step end are removed
  Continuous,  // killed on contact with 0 anywhere in the step
};

struct PropagationConfig {
  double reach_sigmas = 9.0;     // kernel support, in step standard deviations
  double band_exponent = 21.0;   // reflection term dropped once 2uu'/var > this
  double tail_tol = 1e-18;       // relative mass trimmed from the far tails
  double floor_rel = 1e-13;      // node values below this fraction of the peak are zeroed
};

// One step of x -> x + N(d, var) in the barrier frame: d already includes
// the barrier's own motion, so the barrier stays at 0. Continuous mode uses
// the Brownian-bridge survival factor 1 - exp(-2 x x' / var).
DensityGrid propagate_step(const DensityGrid& g, double d, double var, StepMode mode,
                           const PropagationConfig& pc = {});

// Absolute-coordinate form: barriers at level barrier_now / barrier_next, a
// step of mean `drift` and variance `var`. A non-finite barrier means no
// barrier, in which case the grid holds absolute positions and mass is
// conserved up to tail trimming.
DensityGrid propagate_step(const DensityGrid& g, double drift, double barrier_now,
                           double barrier_next, double var,
                           const PropagationConfig& pc = {});

// Removes mass above 0 and re-anchors the grid so that x_top = 0.
DensityGrid truncate_at_zero(const DensityGrid& g);

}  // namespace brwre
