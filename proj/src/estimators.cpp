#include "fklab/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "fklab/cluster.hpp"
#include "fklab/numeric.hpp"
#include "fklab/sampler.hpp"

namespace fklab {
namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt_coords(const Coords& x, int d) {
  std::string s = "(";
  for (int i = 0; i < d; ++i) {
    if (i) s += ",";
    s += std::to_string(x[static_cast<std::size_t>(i)]);
  }
  return s + ")";
}

// A row of observables evaluated on one retained sample.  gamma_rng is the
// stream reserved for sprinkling draws; consuming it identically per sample
// keeps runs reproducible.
using RowFn = std::function<void(const BondConfig& omega, RngStream& gamma_rng, double* row)>;

struct EngineResult {
  long per_stream = 0;
  long total = 0;
  std::vector<double> mean;
  std::vector<double> se;
  double seconds = 0;
};

void check_run_spec(const RunSpec& spec, long samples) {
  if (spec.region == nullptr) throw std::invalid_argument("estimate: missing region");
  if (samples < 1) throw std::invalid_argument("estimate: need at least one sample");
  if (spec.mc.chains < 1) throw std::invalid_argument("estimate: chains must be positive");
  if (spec.mc.burn_in < 0 || spec.mc.thinning < 0)
    throw std::invalid_argument("estimate: negative burn-in or thinning");
  if (spec.eps < 0 || spec.eps > 1)
    throw std::invalid_argument("estimate: sprinkling intensity must be in [0,1]");
}

// Executes run_stream(s) for every fixed stream on a pool of `chains`
// workers (sequentially when the pool is trivial).
void pool_over_streams(int chains, const std::function<void(int)>& run_stream) {
  const int workers = std::min(chains, kEstimatorStreams);
  if (workers <= 1) {
    for (int s = 0; s < kEstimatorStreams; ++s) run_stream(s);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error = nullptr;
  std::mutex error_lock;
  auto worker = [&] {
    for (;;) {
      const int s = next.fetch_add(1);
      if (s >= kEstimatorStreams) return;
      try {
        run_stream(s);
      } catch (...) {
        std::lock_guard<std::mutex> hold(error_lock);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Runs the fixed set of independent streams and averages the rows, with each
// stream serving as one batch for the batch-means stderr.  mc.chains only
// sizes the worker pool; slots are merged in stream order, so the numbers
// are identical for any pool size.
EngineResult run_chains(const RunSpec& spec, long samples, int width, const RowFn& row_fn) {
  check_run_spec(spec, samples);
  const McKnobs& mc = spec.mc;
  const auto t0 = std::chrono::steady_clock::now();
  const FkSystem sys = FkSystem::make(*spec.region, spec.bc, spec.p, spec.q);
  const long per_stream = (samples + kEstimatorStreams - 1) / kEstimatorStreams;
  const int n_edges = spec.region->n_edges();

  std::vector<std::vector<double>> slots(static_cast<std::size_t>(kEstimatorStreams));
  auto run_stream = [&](int s) {
    std::vector<double> sums(static_cast<std::size_t>(width), 0.0);
    RngStream chain_rng = RngStream::keyed(mc.seed, static_cast<std::uint64_t>(s), kPurposeChain);
    RngStream gamma_rng = RngStream::keyed(mc.seed, static_cast<std::uint64_t>(s), kPurposeSprinkle);
    BondConfig omega(n_edges);
    std::vector<double> row(static_cast<std::size_t>(width));
    auto sweep = [&] {
      if (mc.swendsen_wang)
        swendsen_wang_step(sys, omega, chain_rng);
      else
        heat_bath_sweep(sys, omega, chain_rng);
    };
    for (int b = 0; b < mc.burn_in; ++b) sweep();
    for (long i = 0; i < per_stream; ++i) {
      for (int t = 0; t < mc.thinning; ++t) sweep();
      row_fn(omega, gamma_rng, row.data());
      for (int c = 0; c < width; ++c)
        sums[static_cast<std::size_t>(c)] += row[static_cast<std::size_t>(c)];
    }
    slots[static_cast<std::size_t>(s)] = std::move(sums);
  };
  pool_over_streams(mc.chains, run_stream);

  EngineResult out;
  out.per_stream = per_stream;
  out.total = per_stream * kEstimatorStreams;
  for (int c = 0; c < width; ++c) {
    NeumaierSum total;
    for (int s = 0; s < kEstimatorStreams; ++s)
      total.add(slots[static_cast<std::size_t>(s)][static_cast<std::size_t>(c)]);
    const double mean = total.value() / static_cast<double>(out.total);
    NeumaierSum sq;
    for (int s = 0; s < kEstimatorStreams; ++s) {
      const double m = slots[static_cast<std::size_t>(s)][static_cast<std::size_t>(c)] /
                       static_cast<double>(per_stream);
      sq.add((m - mean) * (m - mean));
    }
    out.mean.push_back(mean);
    out.se.push_back(std::sqrt(sq.value() / (kEstimatorStreams - 1) / kEstimatorStreams));
  }
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void fill_common(EstimatorResult& r, const RunSpec& spec) {
  r.params["p"] = fmt_g(spec.p);
  r.params["q"] = fmt_g(spec.q);
  r.params["eps"] = fmt_g(spec.eps);
  r.params["seed"] = std::to_string(spec.mc.seed);
  // Statistically there are always kEstimatorStreams chains; mc.chains only
  // sizes the worker pool, so recording it would make otherwise identical
  // results differ.
  r.params["chains"] = std::to_string(kEstimatorStreams);
  r.params["burn_in"] = std::to_string(spec.mc.burn_in);
  r.params["thinning"] = std::to_string(spec.mc.thinning);
  r.params["update"] = spec.mc.swendsen_wang ? "sw" : "heat-bath";
  r.params["bc"] = spec.bc.is_free() ? "free" : "blocks:" + std::to_string(spec.bc.blocks.size());
}

// Surface tension rate from a disconnection probability.  A zero count turns
// the point estimate into a 95% one-sided bound (rule of three).
DerivedQuantity tau_from_disconnection(double prob, double se, long n, double area) {
  DerivedQuantity dq;
  dq.name = "tau_hat";
  if (prob <= 0) {
    dq.bound_only = true;
    dq.value = std::log(static_cast<double>(n) / 3.0) / area;
  } else {
    dq.value = std::log(1.0 / prob) / area;
    dq.stderr_value = se / (prob * area);
  }
  return dq;
}

// The full vertex layer {|x_i| <= half_width, i < d-1; x_d = last} of an
// embedded rectangle.
std::vector<int> layer_vertices(const Region& region, int d, long half_width, long last) {
  std::vector<int> ids;
  Coords x{};
  x[static_cast<std::size_t>(d - 1)] = static_cast<int>(last);
  for (int i = 0; i + 1 < d; ++i) x[static_cast<std::size_t>(i)] = static_cast<int>(-half_width);
  for (;;) {
    const int v = region.vertex_id(x);
    if (v < 0) throw std::invalid_argument("layer outside region");
    ids.push_back(v);
    int ax = d - 2;
    while (ax >= 0 && x[static_cast<std::size_t>(ax)] == half_width) {
      x[static_cast<std::size_t>(ax)] = static_cast<int>(-half_width);
      --ax;
    }
    if (ax < 0) break;
    ++x[static_cast<std::size_t>(ax)];
  }
  return ids;
}

}  // namespace

EstimatorResult estimate(const std::string& name, const RunSpec& spec, long samples,
                         const SampleFn& fn) {
  const BondConfig empty(spec.region ? spec.region->n_edges() : 0);
  RowFn row = [&](const BondConfig& omega, RngStream& gamma_rng, double* out) {
    if (spec.eps > 0) {
      const BondConfig gamma = sprinkle(*spec.region, empty, spec.eps, gamma_rng);
      out[0] = fn(omega, gamma);
    } else {
      out[0] = fn(omega, empty);
    }
  };
  const EngineResult eng = run_chains(spec, samples, 1, row);
  EstimatorResult r;
  r.name = name;
  fill_common(r, spec);
  r.samples = eng.total;
  r.estimate = eng.mean[0];
  r.stderr_value = eng.se[0];
  r.seconds = eng.seconds;
  return r;
}

long chain_per_stream(long samples) {
  return (samples + kEstimatorStreams - 1) / kEstimatorStreams;
}

void run_fk_chains(const RunSpec& spec, long samples, const ChainSink& sink) {
  check_run_spec(spec, samples);
  const McKnobs& mc = spec.mc;
  const FkSystem sys = FkSystem::make(*spec.region, spec.bc, spec.p, spec.q);
  const long per_stream = chain_per_stream(samples);
  const int n_edges = spec.region->n_edges();
  const BondConfig empty(n_edges);

  pool_over_streams(mc.chains, [&](int s) {
    RngStream chain_rng = RngStream::keyed(mc.seed, static_cast<std::uint64_t>(s), kPurposeChain);
    RngStream gamma_rng = RngStream::keyed(mc.seed, static_cast<std::uint64_t>(s), kPurposeSprinkle);
    BondConfig omega(n_edges);
    auto sweep = [&] {
      if (mc.swendsen_wang)
        swendsen_wang_step(sys, omega, chain_rng);
      else
        heat_bath_sweep(sys, omega, chain_rng);
    };
    for (int b = 0; b < mc.burn_in; ++b) sweep();
    for (long i = 0; i < per_stream; ++i) {
      for (int t = 0; t < mc.thinning; ++t) sweep();
      if (spec.eps > 0) {
        const BondConfig gamma = sprinkle(*spec.region, empty, spec.eps, gamma_rng);
        sink(s, i, omega, gamma);
      } else {
        sink(s, i, omega, empty);
      }
    }
  });
}

std::vector<EstimatorResult> estimate_eps_grid(const std::string& name, const RunSpec& spec,
                                               long samples, const std::vector<double>& eps_grid,
                                               const SampleFn& fn) {
  if (eps_grid.empty()) throw std::invalid_argument("estimate_eps_grid: empty grid");
  for (double e : eps_grid)
    if (e < 0 || e > 1)
      throw std::invalid_argument("estimate_eps_grid: intensities must be in [0,1]");
  const BondConfig empty(spec.region ? spec.region->n_edges() : 0);
  const int width = static_cast<int>(eps_grid.size());
  RowFn row = [&](const BondConfig& omega, RngStream& gamma_rng, double* out) {
    const std::vector<BondConfig> gammas = sprinkle_grid(*spec.region, empty, eps_grid, gamma_rng);
    for (int k = 0; k < width; ++k)
      out[k] = fn(omega, gammas[static_cast<std::size_t>(k)]);
  };
  const EngineResult eng = run_chains(spec, samples, width, row);
  std::vector<EstimatorResult> results;
  for (int k = 0; k < width; ++k) {
    EstimatorResult r;
    r.name = name;
    fill_common(r, spec);
    r.params["eps"] = fmt_g(eps_grid[static_cast<std::size_t>(k)]);
    r.samples = eng.total;
    r.estimate = eng.mean[static_cast<std::size_t>(k)];
    r.stderr_value = eng.se[static_cast<std::size_t>(k)];
    r.seconds = eng.seconds;
    results.push_back(std::move(r));
  }
  return results;
}

EstimatorResult disconnection_free(int d, long big_l, const Frac& delta, long c, double p,
                                   double q, long samples, const McKnobs& mc) {
  if (c < 1) throw std::invalid_argument("disconnection_free: C must be at least 1");
  if (big_l < 1) throw std::invalid_argument("disconnection_free: L must be at least 1");
  if (delta.num <= 0 || delta.den <= 0 || delta.num > c * delta.den)
    throw std::invalid_argument("disconnection_free: need 0 < delta <= C");
  const long dl = delta.floor_times(big_l);
  if (dl < 1) throw std::invalid_argument("disconnection_free: delta*L rounds below 1");

  const Region region = Region::box(d, c * big_l);
  const std::vector<int> bottom = layer_vertices(region, d, big_l, -dl);
  const std::vector<int> top = layer_vertices(region, d, big_l, dl);

  RunSpec spec{&region, BoundarySpec::free_bc(), p, q, 0, mc};
  EstimatorResult r =
      estimate("disconnection_free", spec, samples, [&](const BondConfig& omega, const BondConfig&) {
        return sets_connected(region, omega, bottom, top) ? 0.0 : 1.0;
      });
  r.params["d"] = std::to_string(d);
  r.params["L"] = std::to_string(big_l);
  r.params["delta"] = delta.str();
  r.params["C"] = std::to_string(c);
  r.derived = tau_from_disconnection(r.estimate, r.stderr_value, r.samples,
                                     std::pow(static_cast<double>(big_l), d - 1));
  return r;
}

EstimatorResult wired_surface_tension_estimate(int d, long big_l, long m, double p, long samples,
                                               const McKnobs& mc) {
  if (big_l < 1 || m < 1)
    throw std::invalid_argument("wired_surface_tension_estimate: L and M must be at least 1");
  const Region region = Region::rect(d, big_l, m);
  std::vector<int> plus, minus;
  for (int g = region.n_vertices(); g < region.n_combined(); ++g) {
    (region.site_of(g)[static_cast<std::size_t>(d - 1)] >= 0 ? plus : minus).push_back(g);
  }

  RunSpec spec{&region, BoundarySpec::wired(region), p, 2.0, 0, mc};
  EstimatorResult r = estimate("wired_surface_tension", spec, samples,
                               [&](const BondConfig& omega, const BondConfig&) {
                                 return sets_connected(region, omega, plus, minus) ? 0.0 : 1.0;
                               });
  r.params["d"] = std::to_string(d);
  r.params["L"] = std::to_string(big_l);
  r.params["M"] = std::to_string(m);
  r.params["bc"] = "wired";
  r.derived = tau_from_disconnection(r.estimate, r.stderr_value, r.samples,
                                     std::pow(static_cast<double>(big_l), d - 1));
  return r;
}

EstimatorResult slab_connection(int d, long big_l, long n, double p, double q, double eps,
                                const Coords& x, long samples, const McKnobs& mc) {
  const Region region = Region::slab(d, big_l, n);
  const int vx = region.vertex_id(x);
  if (vx < 0) throw std::invalid_argument("slab_connection: x outside the slab");
  const int v0 = region.vertex_id(Coords{});
  const std::vector<int> a{v0};
  const std::vector<int> b{vx};

  RunSpec spec{&region, BoundarySpec::free_bc(), p, q, eps, mc};
  EstimatorResult r =
      estimate("slab_connection", spec, samples, [&](const BondConfig& omega, const BondConfig& gamma) {
        BondConfig joined = omega;
        joined |= gamma;
        return sets_connected(region, joined, a, b) ? 1.0 : 0.0;
      });
  r.params["d"] = std::to_string(d);
  r.params["L"] = std::to_string(big_l);
  r.params["N"] = std::to_string(n);
  r.params["x"] = fmt_coords(x, d);
  return r;
}

EstimatorResult weak_mixing_gap(int d, long k, double s, double p, long samples,
                                const McKnobs& mc) {
  if (k < 1) throw std::invalid_argument("weak_mixing_gap: K must be at least 1");
  if (s < 0 || s > 1) throw std::invalid_argument("weak_mixing_gap: s must be in [0,1]");
  const Region region = Region::half_box(d, k);
  const std::vector<int>& bottom = region.face("bottom");
  const std::vector<int>& rest = region.face("rest");

  std::vector<char> is_bottom(static_cast<std::size_t>(region.n_combined()), 0);
  for (int g : bottom) is_bottom[static_cast<std::size_t>(g)] = 1;
  std::unordered_map<int, double> intensity;
  for (int e = 0; e < region.n_edges(); ++e) {
    const auto& ed = region.edges()[static_cast<std::size_t>(e)];
    if (is_bottom[static_cast<std::size_t>(ed.a)] || is_bottom[static_cast<std::size_t>(ed.b)])
      intensity[e] = s;
  }

  BoundarySpec rest_wired;
  std::vector<int> all = bottom;
  all.insert(all.end(), rest.begin(), rest.end());
  rest_wired.blocks = {all};
  rest_wired.intensity = intensity;
  BoundarySpec rest_free;
  rest_free.blocks = {bottom};
  rest_free.intensity = intensity;

  const int b0 = region.up_edge(region.vertex_id(Coords{}), d - 1);
  const auto marginal = [&](const BondConfig& omega, const BondConfig&) {
    return omega.get(b0) ? 1.0 : 0.0;
  };
  RunSpec wired_spec{&region, rest_wired, p, 2.0, 0, mc};
  RunSpec free_spec{&region, rest_free, p, 2.0, 0, mc};
  const EstimatorResult hi = estimate("weak_mixing_marginal", wired_spec, samples, marginal);
  const EstimatorResult lo = estimate("weak_mixing_marginal", free_spec, samples, marginal);

  EstimatorResult r = hi;
  r.name = "weak_mixing_gap";
  r.estimate = hi.estimate - lo.estimate;
  r.stderr_value = std::hypot(hi.stderr_value, lo.stderr_value);
  r.seconds = hi.seconds + lo.seconds;
  r.params["d"] = std::to_string(d);
  r.params["K"] = std::to_string(k);
  r.params["s"] = fmt_g(s);
  r.params["bc"] = "rest-wired-minus-rest-free";
  return r;
}

UTrajectoryReport u_trajectory_report(const RunSpec& spec, long samples, long box_radius,
                                      const std::vector<long>& radii) {
  if (spec.region == nullptr) throw std::invalid_argument("u_trajectory_report: missing region");
  const BondConfig empty(spec.region->n_edges());
  u_sequence_with_radii(*spec.region, empty, empty, box_radius, radii);  // validate once

  const int len = static_cast<int>(radii.size());
  const int n_halving = len > 8 ? len - 8 : 0;
  const int width = len + n_halving;
  RowFn row = [&](const BondConfig& omega, RngStream& gamma_rng, double* out) {
    USequence seq;
    if (spec.eps > 0) {
      const BondConfig gamma = sprinkle(*spec.region, empty, spec.eps, gamma_rng);
      seq = u_sequence_with_radii(*spec.region, omega, gamma, box_radius, radii);
    } else {
      seq = u_sequence_with_radii(*spec.region, omega, empty, box_radius, radii);
    }
    for (int i = 0; i < len; ++i) out[i] = seq.counts[static_cast<std::size_t>(i)];
    for (int i = 0; i < n_halving; ++i) {
      const double ui = seq.counts[static_cast<std::size_t>(i)];
      const double u8 = seq.counts[static_cast<std::size_t>(i + 8)];
      out[len + i] = u8 > std::max(1.0, ui / 2.0) ? 1.0 : 0.0;
    }
  };
  const EngineResult eng = run_chains(spec, samples, width, row);
  UTrajectoryReport rep;
  rep.box_radius = box_radius;
  rep.radii = radii;
  rep.samples = eng.total;
  rep.seconds = eng.seconds;
  for (int i = 0; i < len; ++i) {
    rep.mean_counts.push_back(eng.mean[static_cast<std::size_t>(i)]);
    rep.count_stderr.push_back(eng.se[static_cast<std::size_t>(i)]);
  }
  for (int i = 0; i < n_halving; ++i)
    rep.halving_freq.push_back(eng.mean[static_cast<std::size_t>(len + i)]);
  return rep;
}

}  // namespace fklab
