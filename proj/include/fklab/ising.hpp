#pragma once

#include <cstdint>
#include <vector>

#include "fklab/geometry.hpp"
#include "fklab/rng.hpp"

namespace fklab {

// Bond intensity matching inverse temperature beta at coupling 1.
double beta_to_p(double beta);
double p_to_beta(double p);

// Field, in energy units per site, equivalent to diluted plus bonds of
// intensity s*p: h = -log(1 - s*p) / 2.
double field_for_intensity(double s, double p);

// Ghost spin presets.
std::vector<int> plus_ghosts(const Region& region);
// +1 where the coordinate along axis is >= 0, else -1.
std::vector<int> split_ghosts(const Region& region, int axis);

// Spin system prepared for sweeps: fixed ghost spins, per-vertex couplings.
struct IsingSystem {
  const Region* region = nullptr;
  double beta = 0.0;
  std::vector<int8_t> fixed;  // combined ids; ghosts hold their pin, 0 = absent
  // Per region vertex: (neighbor combined id, beta * coupling).
  std::vector<std::vector<std::pair<int, double>>> incident;

  static IsingSystem make(const Region& region, double beta, const std::vector<int>& ghost_spin,
                          const std::vector<double>& coupling = {});
};

// Spins vector uses combined ids; ghost entries are kept at their pins.
std::vector<int8_t> all_plus_spins(const IsingSystem& sys);
void ising_heat_bath_sweep(const IsingSystem& sys, std::vector<int8_t>& spin, RngStream& rng);
// Probability that vertex v takes spin +1 given its neighborhood.
double ising_site_conditional(const IsingSystem& sys, const std::vector<int8_t>& spin, int v);
double magnetization(const Region& region, const std::vector<int8_t>& spin);

// log of the ratio between the all-plus and the sign-split partition sums on
// a region whose ghosts are split along the last axis.  Enumeration-backed,
// so region caps apply.
double surface_log_ratio_exact(const Region& region, double beta);
// Same quantity differentiated in beta: a sum of per-edge correlation gaps,
// each of which is nonnegative.
double surface_log_ratio_derivative_exact(const Region& region, double beta);

// Cross-check of the ratio's beta derivative on an embedded rectangle: a
// central finite difference of the per-area log ratio against the per-edge
// correlation-gap sum.  Both sides carry the 1/L^{d-1} normalization.
struct SurfaceDerivativeReport {
  double tau = 0;    // per-area log ratio at beta
  double fd = 0;     // central difference with step h
  double exact = 0;  // per-area correlation-gap sum
  double gap = 0;    // |fd - exact|
};

SurfaceDerivativeReport surface_derivative_check(int d, long big_l, long m, double beta,
                                                 double h = 1e-4);

}  // namespace fklab
