#pragma once

#include <cstdint>
#include <vector>

#include "fklab/bond_config.hpp"
#include "fklab/cluster.hpp"
#include "fklab/geometry.hpp"
#include "fklab/rng.hpp"

namespace fklab {

// A region plus measure parameters, with the wiring resolved once so sweeps
// do not re-derive it per edge.
struct FkSystem {
  const Region* region = nullptr;
  BoundarySpec bc;
  double p = 0.5;
  double q = 2.0;
  std::vector<double> pe;             // per-edge open intensity
  std::vector<char> free_ghost_edge;  // one endpoint is a ghost outside every block
  std::vector<int32_t> parent0;       // union-find state with only the wiring applied
  std::vector<char> flags0;           // bit 1: meets region, bit 2: meets a block

  static FkSystem make(const Region& region, BoundarySpec bc, double p, double q);
};

// Exact single-edge conditional: probability that e is open given every
// other edge of omega.  Shared by the sweep and by tests.
double heat_bath_conditional(const FkSystem& sys, const BondConfig& omega, int e);

// One deterministic-order pass of single-edge resamples; consumes exactly
// one uniform per edge.
void heat_bath_sweep(const FkSystem& sys, BondConfig& omega, RngStream& rng);

// Cluster-flip step; q must be a positive integer (colors are uniform over q).
// Weight-free components keep no color and their edges reopen independently.
void swendsen_wang_step(const FkSystem& sys, BondConfig& omega, RngStream& rng);

// Open every closed edge independently with probability eps, on top of omega.
BondConfig sprinkle(const Region& region, const BondConfig& omega, double eps, RngStream& rng);

// Same, for a whole intensity grid with one shared uniform per edge, so the
// results are nested along eps.  eps values may come in any order.
std::vector<BondConfig> sprinkle_grid(const Region& region, const BondConfig& omega,
                                      const std::vector<double>& eps, RngStream& rng);

// One sweep of two chains at p_lo <= p_hi driven by shared uniforms; keeps
// lo <= hi edgewise when q >= 1.  Systems must share region, wiring, and q.
void coupled_heat_bath_sweep(const FkSystem& lo_sys, const FkSystem& hi_sys, BondConfig& lo,
                             BondConfig& hi, RngStream& rng);

// Sprinkling intensity that dominates a p_lo -> p_hi increment.
double epsilon_for(double p_lo, double p_hi, double q);

}  // namespace fklab
