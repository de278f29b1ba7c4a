#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fklab/bond_config.hpp"
#include "fklab/events.hpp"
#include "fklab/geometry.hpp"

namespace fklab {

// A quantity computed from an estimated probability, such as a surface
// tension rate.  bound_only marks a one-sided bound from a zero event count.
struct DerivedQuantity {
  std::string name;
  double value = 0;
  double stderr_value = 0;
  bool bound_only = false;
};

struct EstimatorResult {
  std::string name;
  std::map<std::string, std::string> params;
  long samples = 0;
  double estimate = 0;
  double stderr_value = 0;
  std::optional<DerivedQuantity> derived;
  double seconds = 0;
};

// Monte Carlo runs always use this many independent streams; each stream is
// one batch for the batch-means stderr.  Requested sample counts round up to
// a multiple of it.
inline constexpr int kEstimatorStreams = 16;

// Sampler knobs shared by every estimator.  `chains` is the worker pool size
// over the fixed streams; every statistic is a pure function of the knobs
// minus `chains`, so runs with different pool sizes agree byte for byte.
struct McKnobs {
  bool swendsen_wang = false;
  int burn_in = 1000;
  int thinning = 10;
  std::uint64_t seed = 0;
  int chains = 1;
};

// What to sample: a region with boundary conditions and FK parameters, plus
// an optional sprinkling intensity eps for the product-measure overlay.
struct RunSpec {
  const Region* region = nullptr;
  BoundarySpec bc;
  double p = 0.5;
  double q = 1.0;
  double eps = 0;
  McKnobs mc;
};

// Observable evaluated on one retained sample.  gamma is all-closed unless
// the run sprinkles (eps > 0 or an explicit grid).
using SampleFn = std::function<double(const BondConfig& omega, const BondConfig& gamma)>;

// Frequency/mean estimate of fn over the FK chain described by spec, with
// batch-means stderr across the independent streams.
EstimatorResult estimate(const std::string& name, const RunSpec& spec, long samples,
                         const SampleFn& fn);

// Low-level access to the same fixed streams: burn-in and thinning run
// exactly as in estimate, and every retained sample is handed to sink with
// its stream and in-stream index.  sink may run concurrently across streams
// (one call per (stream, index) pair), so it must write only to its own
// slot; gamma is sprinkled at spec.eps, all-closed when eps is 0.
using ChainSink =
    std::function<void(int stream, long index, const BondConfig& omega, const BondConfig& gamma)>;

// Retained samples per stream for a requested total: ceil(samples/streams).
long chain_per_stream(long samples);

void run_fk_chains(const RunSpec& spec, long samples, const ChainSink& sink);

// Same chain, one result per sprinkling intensity.  Each sample draws one
// uniform per edge and reuses it across the grid, so the gammas are nested
// and the estimates share common random numbers.
std::vector<EstimatorResult> estimate_eps_grid(const std::string& name, const RunSpec& spec,
                                               long samples, const std::vector<double>& eps_grid,
                                               const SampleFn& fn);

// Probability that the bottom layer {-L..L}^{d-1} x {-dL} fails to reach the
// top layer at +dL inside the free-boundary box of radius C*L, with the
// surface tension rate log(1/prob)/L^{d-1} attached as a derived quantity.
// A zero count yields a 95% one-sided bound instead (flagged bound_only).
EstimatorResult disconnection_free(int d, long big_l, const Frac& delta, long c, double p,
                                   double q, long samples, const McKnobs& mc);

// q=2 analogue on the wired rectangle {-L..L}^{d-1} x {-M..M}: probability
// that the ghost camps above and below the equator stay disconnected, with
// the same derived rate.
EstimatorResult wired_surface_tension_estimate(int d, long big_l, long m, double p, long samples,
                                               const McKnobs& mc);

// Probability of {0 <-> x in omega union gamma} on the free-boundary slab
// {-L..L}^{d-2} x {-N..N}^2 under sprinkling intensity eps.
EstimatorResult slab_connection(int d, long big_l, long n, double p, double q, double eps,
                                const Coords& x, long samples, const McKnobs& mc);

// Difference of the marginals of the vertical edge at the origin of the
// half-box H(K) between rest-wired and rest-free boundary conditions, both
// with intensity s on the bonds reaching the bottom face and the bottom
// ghosts wired (q=2).  stderr is pooled from the two runs.
EstimatorResult weak_mixing_gap(int d, long k, double s, double p, long samples,
                                const McKnobs& mc);

// Mean boundary-cluster class counts along a radius schedule, plus the
// frequency of each halving-failure event {U_{i+8} > max(1, U_i/2)} where
// the schedule is at least nine radii long.
struct UTrajectoryReport {
  long box_radius = 0;
  std::vector<long> radii;
  std::vector<double> mean_counts;
  std::vector<double> count_stderr;
  std::vector<double> halving_freq;
  long samples = 0;
  double seconds = 0;
};

UTrajectoryReport u_trajectory_report(const RunSpec& spec, long samples, long box_radius,
                                      const std::vector<long>& radii);

}  // namespace fklab
