#include "fklab/ising.hpp"

#include <cmath>
#include <stdexcept>

#include "fklab/oracle.hpp"

namespace fklab {

double beta_to_p(double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  return 1.0 - std::exp(-2.0 * beta);
}

double p_to_beta(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("p must be in [0,1)");
  return -std::log(1.0 - p) / 2.0;
}

double field_for_intensity(double s, double p) {
  double sp = s * p;
  if (!(sp >= 0.0 && sp < 1.0)) throw std::invalid_argument("s*p must be in [0,1)");
  return -std::log(1.0 - sp) / 2.0;
}

std::vector<int> plus_ghosts(const Region& region) {
  return std::vector<int>(static_cast<std::size_t>(region.n_ghosts()), 1);
}

std::vector<int> split_ghosts(const Region& region, int axis) {
  if (axis < 0 || axis >= region.d()) throw std::invalid_argument("axis out of range");
  std::vector<int> out(static_cast<std::size_t>(region.n_ghosts()));
  for (int g = 0; g < region.n_ghosts(); ++g) {
    const Coords& x = region.site_of(region.n_vertices() + g);
    out[static_cast<std::size_t>(g)] = x[static_cast<std::size_t>(axis)] >= 0 ? 1 : -1;
  }
  return out;
}

IsingSystem IsingSystem::make(const Region& region, double beta, const std::vector<int>& ghost_spin,
                              const std::vector<double>& coupling) {
  if (!ghost_spin.empty() && static_cast<int>(ghost_spin.size()) != region.n_ghosts())
    throw std::invalid_argument("ghost spin list does not match region");
  if (!coupling.empty() && static_cast<int>(coupling.size()) != region.n_edges())
    throw std::invalid_argument("coupling list does not match region");

  IsingSystem sys;
  sys.region = &region;
  sys.beta = beta;
  sys.fixed.assign(static_cast<std::size_t>(region.n_combined()), 0);
  for (int g = 0; g < region.n_ghosts(); ++g) {
    int val = ghost_spin.empty() ? 0 : ghost_spin[static_cast<std::size_t>(g)];
    if (val != 0 && val != 1 && val != -1)
      throw std::invalid_argument("ghost spin must be -1, 0, or +1");
    sys.fixed[static_cast<std::size_t>(region.n_vertices() + g)] = static_cast<int8_t>(val);
  }

  sys.incident.resize(static_cast<std::size_t>(region.n_vertices()));
  const auto& edges = region.edges();
  for (int e = 0; e < region.n_edges(); ++e) {
    int a = edges[static_cast<std::size_t>(e)].a;
    int b = edges[static_cast<std::size_t>(e)].b;
    if (region.is_ghost(a) && sys.fixed[static_cast<std::size_t>(a)] == 0) continue;
    if (region.is_ghost(b) && sys.fixed[static_cast<std::size_t>(b)] == 0) continue;
    double bj = beta * (coupling.empty() ? 1.0 : coupling[static_cast<std::size_t>(e)]);
    if (a < region.n_vertices()) sys.incident[static_cast<std::size_t>(a)].push_back({b, bj});
    if (b < region.n_vertices()) sys.incident[static_cast<std::size_t>(b)].push_back({a, bj});
  }
  return sys;
}

std::vector<int8_t> all_plus_spins(const IsingSystem& sys) {
  std::vector<int8_t> spin = sys.fixed;
  for (int v = 0; v < sys.region->n_vertices(); ++v) spin[static_cast<std::size_t>(v)] = 1;
  return spin;
}

double ising_site_conditional(const IsingSystem& sys, const std::vector<int8_t>& spin, int v) {
  double h = 0.0;
  for (const auto& [other, bj] : sys.incident[static_cast<std::size_t>(v)])
    h += bj * spin[static_cast<std::size_t>(other)];
  return 1.0 / (1.0 + std::exp(-2.0 * h));
}

void ising_heat_bath_sweep(const IsingSystem& sys, std::vector<int8_t>& spin, RngStream& rng) {
  for (int v = 0; v < sys.region->n_vertices(); ++v) {
    double up = ising_site_conditional(sys, spin, v);
    spin[static_cast<std::size_t>(v)] = rng.bernoulli(up) ? 1 : -1;
  }
}

double magnetization(const Region& region, const std::vector<int8_t>& spin) {
  double sum = 0.0;
  for (int v = 0; v < region.n_vertices(); ++v) sum += spin[static_cast<std::size_t>(v)];
  return sum / static_cast<double>(region.n_vertices());
}

double surface_log_ratio_exact(const Region& region, double beta) {
  int axis = region.d() - 1;
  IsingModel plus{&region, beta, plus_ghosts(region), {}};
  IsingModel split{&region, beta, split_ghosts(region, axis), {}};
  return std::log(ising_partition(plus) / ising_partition(split));
}

double surface_log_ratio_derivative_exact(const Region& region, double beta) {
  int axis = region.d() - 1;
  IsingModel plus{&region, beta, plus_ghosts(region), {}};
  IsingModel split{&region, beta, split_ghosts(region, axis), {}};
  const auto& edges = region.edges();
  double total = 0.0;
  for (int e = 0; e < region.n_edges(); ++e) {
    int a = edges[static_cast<std::size_t>(e)].a;
    int b = edges[static_cast<std::size_t>(e)].b;
    double gap = ising_two_point(plus, a, b) - ising_two_point(split, a, b);
    if (gap < -1e-12) throw std::runtime_error("correlation gap went negative");
    total += gap;
  }
  return total;
}

SurfaceDerivativeReport surface_derivative_check(int d, long big_l, long m, double beta,
                                                 double h) {
  if (h <= 0) throw std::invalid_argument("surface_derivative_check: step must be positive");
  const Region region = Region::rect(d, big_l, m);
  const double area = std::pow(static_cast<double>(big_l), d - 1);
  SurfaceDerivativeReport rep;
  rep.tau = surface_log_ratio_exact(region, beta) / area;
  const double up = surface_log_ratio_exact(region, beta + h);
  const double down = surface_log_ratio_exact(region, beta - h);
  rep.fd = (up - down) / (2.0 * h * area);
  rep.exact = surface_log_ratio_derivative_exact(region, beta) / area;
  rep.gap = std::abs(rep.fd - rep.exact);
  return rep;
}

}  // namespace fklab
