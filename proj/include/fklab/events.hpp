#pragma once

#include <vector>

#include "fklab/bond_config.hpp"
#include "fklab/geometry.hpp"

namespace fklab {

// One merging trajectory: class counts of the boundary-touching clusters as
// the inner box shrinks and the helper bonds grow.
struct USequence {
  long box_radius = 0;       // the outer cluster box
  std::vector<long> radii;   // inner box radius per step
  std::vector<int> counts;   // class count per step, nonincreasing
};

// Every grid box of radius ell centered on a spacing-ell site inside the
// inner box reaches the boundary shell of the outer box through open edges.
bool density_event(const Region& region, const BondConfig& omega, long ell, long r_inner,
                   long r_outer);

// Part (a) alone: some cluster of omega inside the box of radius m around
// center touches both the shell at m/8 and the shell at m.
bool unique_crossing_exists(const Region& region, const BondConfig& omega, const Coords& center,
                            long m);

// Crossing exists and every cluster crossing the m/4..m/2 annulus falls in
// one class under (omega or gamma) connectivity inside the m/2 box.
bool unique_event(const Region& region, const BondConfig& omega, const BondConfig& gamma,
                  const Coords& center, long m);

// Class counts at origin for the standard shrinking schedule.
USequence u_sequence(const Region& region, const BondConfig& omega, const BondConfig& gamma,
                     long big_l, const Frac& delta);

// Same with an explicit inner-radius schedule (must be strictly decreasing,
// first entry at most box_radius/2 rounded up).
USequence u_sequence_with_radii(const Region& region, const BondConfig& omega,
                                const BondConfig& gamma, long box_radius,
                                const std::vector<long>& radii);

}  // namespace fklab
