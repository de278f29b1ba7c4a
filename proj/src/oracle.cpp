#include "fklab/oracle.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "fklab/numeric.hpp"

namespace fklab {

namespace {

void check_fk_model(const FkModel& model) {
  if (model.region == nullptr) throw std::invalid_argument("fk model has no region");
  if (!(model.p >= 0.0 && model.p <= 1.0)) throw std::invalid_argument("p outside [0,1]");
  if (!(model.q > 0.0)) throw std::invalid_argument("q must be positive");
  model.bc.validate(*model.region);
  if (model.region->n_edges() > kMaxOracleEdges)
    throw CapExceeded("enumeration needs " + std::to_string(model.region->n_edges()) +
                      " edges, cap is " + std::to_string(kMaxOracleEdges));
}

// Tensor build of subset probability products: table[m] is the product over
// bits of m of pe and over unset bits of (1 - pe), for the given edge window.
std::vector<double> subset_products(const std::vector<double>& pe, int first, int count) {
  std::vector<double> table(static_cast<std::size_t>(1) << count, 1.0);
  std::size_t size = 1;
  for (int b = 0; b < count; ++b) {
    double open = pe[static_cast<std::size_t>(first + b)];
    for (std::size_t m = 0; m < size; ++m) {
      table[size + m] = table[m] * open;
      table[m] *= 1.0 - open;
    }
    size <<= 1;
  }
  return table;
}

int find_root(std::vector<int32_t>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] =
        parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

// Attach the larger root below the smaller so roots are min members.
void unite_min(std::vector<int32_t>& parent, std::vector<char>& flags, int a, int b) {
  int ra = find_root(parent, a);
  int rb = find_root(parent, b);
  if (ra == rb) return;
  if (rb < ra) std::swap(ra, rb);
  parent[static_cast<std::size_t>(rb)] = ra;
  flags[static_cast<std::size_t>(ra)] =
      static_cast<char>(flags[static_cast<std::size_t>(ra)] | flags[static_cast<std::size_t>(rb)]);
}

}  // namespace

FkSummary fk_summary(const FkModel& model, const std::vector<FkPredicate>& events) {
  check_fk_model(model);
  const Region& region = *model.region;
  int n = region.n_edges();
  int nc = region.n_combined();
  std::vector<double> pe = model.bc.edge_probabilities(region, model.p);

  int lo_bits = n < 12 ? n : 12;
  int hi_bits = n - lo_bits;
  std::vector<double> lo = subset_products(pe, 0, lo_bits);
  std::vector<double> hi = subset_products(pe, lo_bits, hi_bits);
  std::uint64_t lo_mask = (1ull << lo_bits) - 1;

  std::vector<double> qpow(static_cast<std::size_t>(nc) + 1, 1.0);
  for (std::size_t k = 1; k < qpow.size(); ++k) qpow[k] = qpow[k - 1] * model.q;

  // Wiring is the same for every configuration: resolve it once.
  std::vector<int32_t> parent0(static_cast<std::size_t>(nc));
  std::vector<char> flags0(static_cast<std::size_t>(nc), 0);
  for (int i = 0; i < nc; ++i) {
    parent0[static_cast<std::size_t>(i)] = i;
    if (i < region.n_vertices()) flags0[static_cast<std::size_t>(i)] = 1;
  }
  for (const auto& block : model.bc.blocks)
    for (std::size_t i = 0; i < block.size(); ++i) {
      flags0[static_cast<std::size_t>(block[i])] =
          static_cast<char>(flags0[static_cast<std::size_t>(block[i])] | 2);
      if (i > 0) unite_min(parent0, flags0, block[0], block[i]);
    }
  for (int i = 0; i < nc; ++i) find_root(parent0, i);

  const auto& edges = region.edges();
  std::vector<int32_t> parent(static_cast<std::size_t>(nc));
  std::vector<char> flags(static_cast<std::size_t>(nc));
  std::vector<int32_t> root(static_cast<std::size_t>(nc));

  NeumaierSum zsum;
  std::vector<NeumaierSum> edge_sum(static_cast<std::size_t>(n));
  std::vector<NeumaierSum> event_sum(events.size());
  BondConfig cfg(n);

  std::uint64_t total = 1ull << n;
  for (std::uint64_t m = 0; m < total; ++m) {
    std::memcpy(parent.data(), parent0.data(), static_cast<std::size_t>(nc) * sizeof(int32_t));
    std::memcpy(flags.data(), flags0.data(), static_cast<std::size_t>(nc));
    for (std::uint64_t bits = m; bits != 0; bits &= bits - 1) {
      int e = std::countr_zero(bits);
      unite_min(parent, flags, edges[static_cast<std::size_t>(e)].a,
                edges[static_cast<std::size_t>(e)].b);
    }
    int k_weight = 0;
    for (int i = 0; i < nc; ++i)
      if (parent[static_cast<std::size_t>(i)] == i && (flags[static_cast<std::size_t>(i)] & 3) != 0)
        ++k_weight;

    double w = lo[m & lo_mask] * hi[m >> lo_bits] * qpow[static_cast<std::size_t>(k_weight)];
    zsum.add(w);
    for (std::uint64_t bits = m; bits != 0; bits &= bits - 1)
      edge_sum[static_cast<std::size_t>(std::countr_zero(bits))].add(w);

    if (!events.empty()) {
      for (int i = 0; i < nc; ++i) root[static_cast<std::size_t>(i)] = find_root(parent, i);
      cfg.set_bits(m);
      OracleView view(root, flags);
      for (std::size_t j = 0; j < events.size(); ++j)
        if (events[j](cfg, view)) event_sum[j].add(w);
    }
  }

  FkSummary out;
  out.z = zsum.value();
  if (!(out.z > 0.0)) throw std::runtime_error("partition sum is not positive");
  out.open_prob.resize(static_cast<std::size_t>(n));
  for (int e = 0; e < n; ++e)
    out.open_prob[static_cast<std::size_t>(e)] = edge_sum[static_cast<std::size_t>(e)].value() / out.z;
  out.event_prob.resize(events.size());
  for (std::size_t j = 0; j < events.size(); ++j)
    out.event_prob[j] = event_sum[j].value() / out.z;
  return out;
}

double fk_partition(const FkModel& model) { return fk_summary(model).z; }

double fk_edge_marginal(const FkModel& model, int e) {
  FkSummary s = fk_summary(model);
  if (e < 0 || e >= static_cast<int>(s.open_prob.size()))
    throw std::invalid_argument("edge id out of range");
  return s.open_prob[static_cast<std::size_t>(e)];
}

double fk_event_prob(const FkModel& model, const FkPredicate& event) {
  return fk_summary(model, {event}).event_prob[0];
}

double fk_conditional_open(const FkModel& model, int e, const BondConfig& others) {
  check_fk_model(model);
  const Region& region = *model.region;
  if (e < 0 || e >= region.n_edges()) throw std::invalid_argument("edge id out of range");
  std::vector<double> pe = model.bc.edge_probabilities(region, model.p);

  BondConfig open = others;
  open.set(e, true);
  BondConfig closed = others;
  closed.set(e, false);
  auto lab_open = label_clusters(region, open, model.bc);
  auto lab_closed = label_clusters(region, closed, model.bc);

  // Everything except edge e's own factor and the cluster count cancels.
  double w_open = pe[static_cast<std::size_t>(e)] *
                  std::pow(model.q, lab_open.k_weight - lab_closed.k_weight);
  double w_closed = 1.0 - pe[static_cast<std::size_t>(e)];
  return w_open / (w_open + w_closed);
}

namespace {

struct IsingSetup {
  int nv = 0;
  std::vector<int8_t> spin;  // combined ids; ghosts pinned, 0 when absent
  // Included edges as (a, b, beta * coupling).
  struct Term {
    int a;
    int b;
    double bj;
  };
  std::vector<Term> terms;
  std::vector<std::vector<std::pair<int, double>>> incident;  // per region vertex
};

IsingSetup ising_setup(const IsingModel& model) {
  if (model.region == nullptr) throw std::invalid_argument("ising model has no region");
  const Region& region = *model.region;
  if (region.n_vertices() > kMaxOracleSpins)
    throw CapExceeded("enumeration needs " + std::to_string(region.n_vertices()) +
                      " spins, cap is " + std::to_string(kMaxOracleSpins));
  if (!model.ghost_spin.empty() &&
      static_cast<int>(model.ghost_spin.size()) != region.n_ghosts())
    throw std::invalid_argument("ghost spin list does not match region");
  if (!model.coupling.empty() &&
      static_cast<int>(model.coupling.size()) != region.n_edges())
    throw std::invalid_argument("coupling list does not match region");

  IsingSetup s;
  s.nv = region.n_vertices();
  s.spin.assign(static_cast<std::size_t>(region.n_combined()), 0);
  for (int v = 0; v < s.nv; ++v) s.spin[static_cast<std::size_t>(v)] = 1;
  for (int g = 0; g < region.n_ghosts(); ++g) {
    int val = model.ghost_spin.empty() ? 0 : model.ghost_spin[static_cast<std::size_t>(g)];
    if (val != 0 && val != 1 && val != -1)
      throw std::invalid_argument("ghost spin must be -1, 0, or +1");
    s.spin[static_cast<std::size_t>(s.nv + g)] = static_cast<int8_t>(val);
  }

  s.incident.resize(static_cast<std::size_t>(s.nv));
  const auto& edges = region.edges();
  for (int e = 0; e < region.n_edges(); ++e) {
    int a = edges[static_cast<std::size_t>(e)].a;
    int b = edges[static_cast<std::size_t>(e)].b;
    // An absent ghost spin removes the bond.
    if (region.is_ghost(a) && s.spin[static_cast<std::size_t>(a)] == 0) continue;
    if (region.is_ghost(b) && s.spin[static_cast<std::size_t>(b)] == 0) continue;
    double bj = model.beta * (model.coupling.empty() ? 1.0 : model.coupling[static_cast<std::size_t>(e)]);
    s.terms.push_back({a, b, bj});
    if (a < s.nv) s.incident[static_cast<std::size_t>(a)].push_back({b, bj});
    if (b < s.nv) s.incident[static_cast<std::size_t>(b)].push_back({a, bj});
  }
  return s;
}

// Gray-code walk over all spin assignments; calls visit(spins, exp-weight).
template <typename Visit>
void ising_walk(IsingSetup& s, Visit&& visit) {
  double energy = 0.0;
  for (const auto& t : s.terms)
    energy += t.bj * s.spin[static_cast<std::size_t>(t.a)] * s.spin[static_cast<std::size_t>(t.b)];
  visit(s.spin, std::exp(energy));

  std::uint64_t total = 1ull << s.nv;
  for (std::uint64_t i = 1; i < total; ++i) {
    int v = std::countr_zero(i);
    double around = 0.0;
    for (const auto& [other, bj] : s.incident[static_cast<std::size_t>(v)])
      around += bj * s.spin[static_cast<std::size_t>(other)];
    energy -= 2.0 * s.spin[static_cast<std::size_t>(v)] * around;
    s.spin[static_cast<std::size_t>(v)] = static_cast<int8_t>(-s.spin[static_cast<std::size_t>(v)]);
    visit(s.spin, std::exp(energy));
  }
}

}  // namespace

double ising_partition(const IsingModel& model) {
  IsingSetup s = ising_setup(model);
  NeumaierSum z;
  ising_walk(s, [&](const std::vector<int8_t>&, double w) { z.add(w); });
  return z.value();
}

double ising_expectation(const IsingModel& model, const SpinFn& f) {
  IsingSetup s = ising_setup(model);
  NeumaierSum z, num;
  ising_walk(s, [&](const std::vector<int8_t>& spin, double w) {
    z.add(w);
    num.add(f(spin) * w);
  });
  return num.value() / z.value();
}

double ising_two_point(const IsingModel& model, int a, int b) {
  return ising_expectation(model, [a, b](const std::vector<int8_t>& spin) {
    return static_cast<double>(spin[static_cast<std::size_t>(a)]) *
           static_cast<double>(spin[static_cast<std::size_t>(b)]);
  });
}

}  // namespace fklab
