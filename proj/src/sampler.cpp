#include "fklab/sampler.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace fklab {

namespace {

int find_root(std::vector<int32_t>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] =
        parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

void unite_min(std::vector<int32_t>& parent, std::vector<char>& flags, int a, int b) {
  int ra = find_root(parent, a);
  int rb = find_root(parent, b);
  if (ra == rb) return;
  if (rb < ra) std::swap(ra, rb);
  parent[static_cast<std::size_t>(rb)] = ra;
  flags[static_cast<std::size_t>(ra)] =
      static_cast<char>(flags[static_cast<std::size_t>(ra)] | flags[static_cast<std::size_t>(rb)]);
}

struct Scratch {
  std::vector<int32_t> parent;
  std::vector<char> flags;
  std::vector<int8_t> color;
};

Scratch& scratch_for(int n) {
  thread_local Scratch s;
  s.parent.resize(static_cast<std::size_t>(n));
  s.flags.resize(static_cast<std::size_t>(n));
  s.color.resize(static_cast<std::size_t>(n));
  return s;
}

void load_base(const FkSystem& sys, Scratch& s) {
  std::memcpy(s.parent.data(), sys.parent0.data(), sys.parent0.size() * sizeof(int32_t));
  std::memcpy(s.flags.data(), sys.flags0.data(), sys.flags0.size());
}

}  // namespace

FkSystem FkSystem::make(const Region& region, BoundarySpec bc, double p, double q) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p outside [0,1]");
  if (!(q > 0.0)) throw std::invalid_argument("q must be positive");
  bc.validate(region);

  FkSystem sys;
  sys.region = &region;
  sys.bc = std::move(bc);
  sys.p = p;
  sys.q = q;
  sys.pe = sys.bc.edge_probabilities(region, p);

  int nc = region.n_combined();
  sys.parent0.resize(static_cast<std::size_t>(nc));
  sys.flags0.assign(static_cast<std::size_t>(nc), 0);
  for (int i = 0; i < nc; ++i) {
    sys.parent0[static_cast<std::size_t>(i)] = i;
    if (i < region.n_vertices()) sys.flags0[static_cast<std::size_t>(i)] = 1;
  }
  for (const auto& block : sys.bc.blocks)
    for (std::size_t i = 0; i < block.size(); ++i) {
      sys.flags0[static_cast<std::size_t>(block[i])] =
          static_cast<char>(sys.flags0[static_cast<std::size_t>(block[i])] | 2);
      if (i > 0) unite_min(sys.parent0, sys.flags0, block[0], block[i]);
    }
  for (int i = 0; i < nc; ++i) find_root(sys.parent0, i);

  sys.free_ghost_edge.assign(static_cast<std::size_t>(region.n_edges()), 0);
  const auto& edges = region.edges();
  for (int e = 0; e < region.n_edges(); ++e) {
    for (int id : {static_cast<int>(edges[static_cast<std::size_t>(e)].a),
                   static_cast<int>(edges[static_cast<std::size_t>(e)].b)}) {
      if (region.is_ghost(id) && (sys.flags0[static_cast<std::size_t>(id)] & 2) == 0)
        sys.free_ghost_edge[static_cast<std::size_t>(e)] = 1;
    }
  }
  return sys;
}

double heat_bath_conditional(const FkSystem& sys, const BondConfig& omega, int e) {
  const Region& region = *sys.region;
  double open = sys.pe[static_cast<std::size_t>(e)];
  // A lone unwired ghost carries no weight, so its bond is plain noise.
  if (sys.free_ghost_edge[static_cast<std::size_t>(e)]) return open;

  Scratch& s = scratch_for(region.n_combined());
  load_base(sys, s);
  const auto& edges = region.edges();
  for (int f = 0; f < region.n_edges(); ++f) {
    if (f == e || !omega.get(f)) continue;
    unite_min(s.parent, s.flags, edges[static_cast<std::size_t>(f)].a,
              edges[static_cast<std::size_t>(f)].b);
  }
  int ra = find_root(s.parent, edges[static_cast<std::size_t>(e)].a);
  int rb = find_root(s.parent, edges[static_cast<std::size_t>(e)].b);
  if (ra == rb) return open;
  // Both endpoint components carry weight here: a ghost endpoint that could
  // fail to is exactly the free-ghost case handled above.  Opening merges
  // two weighted components into one.
  return open / (open + sys.q * (1.0 - open));
}

void heat_bath_sweep(const FkSystem& sys, BondConfig& omega, RngStream& rng) {
  for (int e = 0; e < sys.region->n_edges(); ++e) {
    double cond = heat_bath_conditional(sys, omega, e);
    omega.set(e, rng.bernoulli(cond));
  }
}

void swendsen_wang_step(const FkSystem& sys, BondConfig& omega, RngStream& rng) {
  const Region& region = *sys.region;
  double q_int = std::round(sys.q);
  if (!(std::abs(sys.q - q_int) < 1e-9) || q_int < 1.0)
    throw std::invalid_argument("cluster-flip step needs integer q >= 1");
  int colors = static_cast<int>(q_int);

  Scratch& s = scratch_for(region.n_combined());
  load_base(sys, s);
  const auto& edges = region.edges();
  for (int e = 0; e < region.n_edges(); ++e)
    if (omega.get(e))
      unite_min(s.parent, s.flags, edges[static_cast<std::size_t>(e)].a,
                edges[static_cast<std::size_t>(e)].b);

  // Color weighted components in root order; weight-free ones keep none.
  int nc = region.n_combined();
  for (int i = 0; i < nc; ++i) {
    if (find_root(s.parent, i) != i) continue;
    if ((s.flags[static_cast<std::size_t>(i)] & 3) == 0) continue;
    s.color[static_cast<std::size_t>(i)] =
        colors == 1 ? 0 : static_cast<int8_t>(rng.below(static_cast<std::uint64_t>(colors)));
  }

  for (int e = 0; e < region.n_edges(); ++e) {
    if (sys.free_ghost_edge[static_cast<std::size_t>(e)]) {
      omega.set(e, rng.bernoulli(sys.pe[static_cast<std::size_t>(e)]));
      continue;
    }
    int ra = find_root(s.parent, edges[static_cast<std::size_t>(e)].a);
    int rb = find_root(s.parent, edges[static_cast<std::size_t>(e)].b);
    bool same = ra == rb || s.color[static_cast<std::size_t>(ra)] == s.color[static_cast<std::size_t>(rb)];
    omega.set(e, same && rng.bernoulli(sys.pe[static_cast<std::size_t>(e)]));
  }
}

BondConfig sprinkle(const Region& region, const BondConfig& omega, double eps, RngStream& rng) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("eps outside [0,1]");
  BondConfig out = omega;
  for (int e = 0; e < region.n_edges(); ++e)
    if (rng.uniform() < eps) out.set(e, true);
  return out;
}

std::vector<BondConfig> sprinkle_grid(const Region& region, const BondConfig& omega,
                                      const std::vector<double>& eps, RngStream& rng) {
  for (double x : eps)
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("eps outside [0,1]");
  std::vector<BondConfig> out(eps.size(), omega);
  for (int e = 0; e < region.n_edges(); ++e) {
    double u = rng.uniform();
    for (std::size_t j = 0; j < eps.size(); ++j)
      if (u < eps[j]) out[j].set(e, true);
  }
  return out;
}

void coupled_heat_bath_sweep(const FkSystem& lo_sys, const FkSystem& hi_sys, BondConfig& lo,
                             BondConfig& hi, RngStream& rng) {
  if (lo_sys.region != hi_sys.region || lo_sys.q != hi_sys.q)
    throw std::invalid_argument("coupled sweep needs matching region and q");
  if (lo_sys.q < 1.0) throw std::invalid_argument("ordered coupling needs q >= 1");
  if (lo_sys.p > hi_sys.p) throw std::invalid_argument("coupled sweep needs p_lo <= p_hi");
  for (int e = 0; e < lo_sys.region->n_edges(); ++e) {
    double cond_lo = heat_bath_conditional(lo_sys, lo, e);
    double cond_hi = heat_bath_conditional(hi_sys, hi, e);
    double u = rng.uniform();
    lo.set(e, u < cond_lo);
    hi.set(e, u < cond_hi);
  }
}

double epsilon_for(double p_lo, double p_hi, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("q must be >= 1");
  if (!(p_lo <= p_hi)) throw std::invalid_argument("needs p_lo <= p_hi");
  return (p_hi - p_lo) / q;
}

}  // namespace fklab
