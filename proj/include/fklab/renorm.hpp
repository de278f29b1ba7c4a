#pragma once

#include <cstdint>
#include <vector>

#include "fklab/bond_config.hpp"
#include "fklab/estimators.hpp"
#include "fklab/geometry.hpp"

namespace fklab {

// Reference threshold for 2D nearest-neighbor site percolation quoted in
// reports.  The scan test brackets it empirically; nothing asserts it exact.
inline constexpr double kSiteThreshold2dRef = 0.593;

// 2D site field on B_n = {-n..n}^2, one bit per renormalized site of a slab
// sample.  Stored row-major: index (u1+n)*(2n+1) + (u2+n).
struct RenormField {
  long n = 0;
  std::vector<std::uint8_t> values;
  long big_l = 0;  // slab thickness parameter
  long big_n = 0;  // slab width parameter
  Frac delta{1, 1};
  long sample_id = 0;

  long side() const { return 2 * n + 1; }
  bool get(long u1, long u2) const;
  void set(long u1, long u2, bool v);
};

// n = floor(8(N-L)/(delta L)); throws unless n >= 1.
long renorm_grid_radius(long big_l, long big_n, const Frac& delta);

// Center x(u): first d-2 coordinates 0, last two round-half-up of
// (delta/8)L*u_j.
Coords renorm_site(int d, long big_l, const Frac& delta, long u1, long u2);

// All centers x(u) for u in B_n, row-major.  Verifies that Lambda_L(x(u))
// stays inside the slab at the extreme corners and rejects otherwise.
std::vector<Coords> renorm_sites(int d, long big_l, long big_n, const Frac& delta);

// eta_u = unique_event(omega, gamma, x(u), floor(delta L)) for every u.
RenormField eta_field(const Region& region, const BondConfig& omega, const BondConfig& gamma,
                      long big_l, long big_n, const Frac& delta);

// Nearest-neighbor site-percolation connectivity from u to v across the open
// sites of the field.  A closed u reaches nothing, itself included.
bool site_connectivity(const RenormField& field, long u1, long u2, long v1, long v2);

// Default conditioning distance ceil(16/delta).
long default_far_distance(const Frac& delta);

struct EtaStatistics {
  long n = 0;
  long k = 0;
  long min_count = 0;
  long samples = 0;
  double mean_density = 0;
  std::vector<double> site_density;  // per u, row-major
  // Minimum over (u, observed far pattern) classes of the conditional
  // frequency of eta_u = 1, ignoring classes with fewer than min_count
  // samples.
  double alpha_hat = 0;
  bool alpha_valid = false;
  long classes_seen = 0;
  long classes_kept = 0;
  long classes_skipped = 0;
};

// Marginal densities plus the minimum empirical conditional density of
// eta_u given the far sites {eta_v : |u-v|_inf >= k}.
EtaStatistics eta_statistics(const std::vector<RenormField>& fields, long k, long min_count = 5);

struct RenormReport {
  long n = 0;
  long m = 0;  // floor(delta L)
  long samples = 0;
  EtaStatistics stats;
  std::vector<double> site_link_freq;  // frequency of 0 <-> u in eta, per u
  double far_link_freq = 0;            // the u = (n,n) entry of the above
  double direct_far_freq = 0;          // 0 <-> x((n,n)) in omega union gamma
  double glue_origin_freq = 0;         // gamma fully open inside Lambda_L(0)
  double glue_far_freq = 0;            // same box centered at x((n,n))
  double seconds = 0;
};

// End-to-end slab run: sample (omega, gamma) under free boundary conditions,
// build the eta field per sample, and aggregate density, alpha_hat, eta
// connectivity to the origin, and the direct far-connection frequency.  When
// keep_fields is given the per-sample fields are appended to it in sample_id
// order.
RenormReport renorm_pipeline(int d, long big_l, long big_n, double p, double q, double eps,
                             const Frac& delta, long samples, const McKnobs& mc,
                             std::vector<RenormField>* keep_fields = nullptr);

}  // namespace fklab
