#include "fklab/renorm.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <utility>

#include "fklab/cluster.hpp"
#include "fklab/events.hpp"

namespace fklab {
namespace {

long floor_div(long a, long b) {
  const long q = a / b;
  return (a % b != 0 && a < 0) ? q - 1 : q;
}

// round(num/den) with ties toward +infinity, den > 0, exact in integers.
long round_frac_half_up(long num, long den) {
  return floor_div(2 * num + den, 2 * den);
}

void check_delta(const Frac& delta) {
  if (delta.num < 1 || delta.den < 1)
    throw std::invalid_argument("renorm: delta must be a positive fraction");
}

long site_index(long n, long u1, long u2) {
  return (u1 + n) * (2 * n + 1) + (u2 + n);
}

// Open sites of the field reachable from (u1, u2) by nearest-neighbor steps,
// as a mask in row-major order.  Empty when the start site is closed.
std::vector<char> reach_from(const RenormField& field, long u1, long u2) {
  const long n = field.n;
  const long side = field.side();
  std::vector<char> seen(static_cast<std::size_t>(side * side), 0);
  if (!field.get(u1, u2)) return seen;
  std::vector<long> queue{site_index(n, u1, u2)};
  seen[static_cast<std::size_t>(queue.front())] = 1;
  while (!queue.empty()) {
    const long at = queue.back();
    queue.pop_back();
    const long r = at / side, c = at % side;
    const long steps[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& s : steps) {
      const long rr = r + s[0], cc = c + s[1];
      if (rr < 0 || rr >= side || cc < 0 || cc >= side) continue;
      const long to = rr * side + cc;
      if (seen[static_cast<std::size_t>(to)] || field.values[static_cast<std::size_t>(to)] == 0)
        continue;
      seen[static_cast<std::size_t>(to)] = 1;
      queue.push_back(to);
    }
  }
  return seen;
}

}  // namespace

bool RenormField::get(long u1, long u2) const {
  return values[static_cast<std::size_t>(site_index(n, u1, u2))] != 0;
}

void RenormField::set(long u1, long u2, bool v) {
  values[static_cast<std::size_t>(site_index(n, u1, u2))] = v ? 1 : 0;
}

long renorm_grid_radius(long big_l, long big_n, const Frac& delta) {
  check_delta(delta);
  if (big_l < 1 || big_n <= big_l)
    throw std::invalid_argument("renorm: slab needs 1 <= L < N");
  const long n = (8 * delta.den * (big_n - big_l)) / (delta.num * big_l);
  if (n < 1)
    throw std::invalid_argument("renorm: grid radius floor(8(N-L)/(delta L)) is below 1");
  return n;
}

Coords renorm_site(int d, long big_l, const Frac& delta, long u1, long u2) {
  check_delta(delta);
  if (d < 3 || d > kMaxDim) throw std::invalid_argument("renorm: slab geometry needs 3 <= d <= 6");
  if (big_l < 1) throw std::invalid_argument("renorm: L must be at least 1");
  Coords x{};
  const long scale = delta.num * big_l;
  x[static_cast<std::size_t>(d - 2)] = static_cast<int>(round_frac_half_up(scale * u1, 8 * delta.den));
  x[static_cast<std::size_t>(d - 1)] = static_cast<int>(round_frac_half_up(scale * u2, 8 * delta.den));
  return x;
}

std::vector<Coords> renorm_sites(int d, long big_l, long big_n, const Frac& delta) {
  const long n = renorm_grid_radius(big_l, big_n, delta);
  // The grid radius is the floor of 8(N-L)/(delta L), so the extreme centers
  // keep their L-boxes inside the slab; verify rather than trust the algebra.
  for (long c1 : {-n, n}) {
    for (long c2 : {-n, n}) {
      const Coords x = renorm_site(d, big_l, delta, c1, c2);
      for (int ax = d - 2; ax < d; ++ax) {
        if (std::labs(static_cast<long>(x[static_cast<std::size_t>(ax)])) + big_l > big_n)
          throw std::logic_error("renorm: corner block leaves the slab");
      }
    }
  }
  std::vector<Coords> out;
  out.reserve(static_cast<std::size_t>((2 * n + 1) * (2 * n + 1)));
  for (long u1 = -n; u1 <= n; ++u1)
    for (long u2 = -n; u2 <= n; ++u2) out.push_back(renorm_site(d, big_l, delta, u1, u2));
  return out;
}

RenormField eta_field(const Region& region, const BondConfig& omega, const BondConfig& gamma,
                      long big_l, long big_n, const Frac& delta) {
  const long m = delta.floor_times(big_l);
  if (m < 8)
    throw std::invalid_argument("eta_field: block radius floor(delta L) must be at least 8");
  const long n = renorm_grid_radius(big_l, big_n, delta);

  RenormField f;
  f.n = n;
  f.big_l = big_l;
  f.big_n = big_n;
  f.delta = delta;
  f.values.assign(static_cast<std::size_t>(f.side() * f.side()), 0);
  std::size_t idx = 0;
  for (long u1 = -n; u1 <= n; ++u1) {
    for (long u2 = -n; u2 <= n; ++u2, ++idx) {
      const Coords x = renorm_site(region.d(), big_l, delta, u1, u2);
      f.values[idx] = unique_event(region, omega, gamma, x, m) ? 1 : 0;
    }
  }
  return f;
}

bool site_connectivity(const RenormField& field, long u1, long u2, long v1, long v2) {
  const long n = field.n;
  for (long c : {u1, u2, v1, v2}) {
    if (std::labs(c) > n) throw std::invalid_argument("site_connectivity: site outside the grid");
  }
  if (!field.get(u1, u2) || !field.get(v1, v2)) return false;
  const std::vector<char> seen = reach_from(field, u1, u2);
  return seen[static_cast<std::size_t>(site_index(n, v1, v2))] != 0;
}

long default_far_distance(const Frac& delta) {
  check_delta(delta);
  return (16 * delta.den + delta.num - 1) / delta.num;
}

EtaStatistics eta_statistics(const std::vector<RenormField>& fields, long k, long min_count) {
  if (fields.empty()) throw std::invalid_argument("eta_statistics: no fields");
  if (k < 1) throw std::invalid_argument("eta_statistics: conditioning distance must be >= 1");
  if (min_count < 1) throw std::invalid_argument("eta_statistics: min_count must be >= 1");
  const long n = fields.front().n;
  const long side = 2 * n + 1;
  const long n_sites = side * side;
  for (const RenormField& f : fields) {
    if (f.n != n || static_cast<long>(f.values.size()) != n_sites)
      throw std::invalid_argument("eta_statistics: fields disagree on the grid size");
  }
  const long n_fields = static_cast<long>(fields.size());

  EtaStatistics out;
  out.n = n;
  out.k = k;
  out.min_count = min_count;
  out.samples = n_fields;

  // Pattern hashing: one random code per site, XOR of the codes of the open
  // far sites identifies the conditioning class.  The far set of u is the
  // grid minus the sup-ball of radius k-1, so its XOR is the whole-field
  // hash with the window hash removed; per-row prefix tables make the window
  // an O(rows) strip sum.  Fixed seed keeps runs reproducible.
  std::mt19937_64 codegen(0x9e3779b97f4a7c15ull);
  std::vector<std::uint64_t> code(static_cast<std::size_t>(n_sites));
  for (auto& c : code) c = codegen();

  const long pw = side + 1;
  std::vector<std::uint64_t> prefix(static_cast<std::size_t>(n_fields * side * pw));
  std::vector<std::uint64_t> full(static_cast<std::size_t>(n_fields), 0);
  std::vector<long> ones(static_cast<std::size_t>(n_sites), 0);
  for (long fi = 0; fi < n_fields; ++fi) {
    const RenormField& f = fields[static_cast<std::size_t>(fi)];
    std::uint64_t* rows = prefix.data() + fi * side * pw;
    std::uint64_t all = 0;
    for (long r = 0; r < side; ++r) {
      std::uint64_t acc = 0;
      rows[r * pw] = 0;
      for (long c = 0; c < side; ++c) {
        const std::size_t i = static_cast<std::size_t>(r * side + c);
        if (f.values[i]) {
          acc ^= code[i];
          ++ones[i];
        }
        rows[r * pw + c + 1] = acc;
      }
      all ^= acc;
    }
    full[static_cast<std::size_t>(fi)] = all;
  }

  long total_ones = 0;
  out.site_density.resize(static_cast<std::size_t>(n_sites));
  for (long i = 0; i < n_sites; ++i) {
    total_ones += ones[static_cast<std::size_t>(i)];
    out.site_density[static_cast<std::size_t>(i)] =
        static_cast<double>(ones[static_cast<std::size_t>(i)]) / static_cast<double>(n_fields);
  }
  out.mean_density = static_cast<double>(total_ones) / static_cast<double>(n_fields * n_sites);

  // Per site: hash the far pattern of every field, sort, read off the class
  // counts.  Sorting keeps memory flat where a per-class map would not.
  std::vector<std::pair<std::uint64_t, unsigned char>> obs(static_cast<std::size_t>(n_fields));
  double alpha = 2.0;
  for (long r = 0; r < side; ++r) {
    const long rlo = std::max(0l, r - (k - 1)), rhi = std::min(side - 1, r + (k - 1));
    for (long c = 0; c < side; ++c) {
      const long clo = std::max(0l, c - (k - 1)), chi = std::min(side - 1, c + (k - 1));
      const std::size_t i = static_cast<std::size_t>(r * side + c);
      for (long fi = 0; fi < n_fields; ++fi) {
        const std::uint64_t* rows = prefix.data() + fi * side * pw;
        std::uint64_t window = 0;
        for (long rr = rlo; rr <= rhi; ++rr) window ^= rows[rr * pw + chi + 1] ^ rows[rr * pw + clo];
        obs[static_cast<std::size_t>(fi)] = {full[static_cast<std::size_t>(fi)] ^ window,
                                             fields[static_cast<std::size_t>(fi)].values[i]};
      }
      std::sort(obs.begin(), obs.end());
      for (std::size_t lo = 0; lo < obs.size();) {
        std::size_t hi = lo;
        long cls_ones = 0;
        while (hi < obs.size() && obs[hi].first == obs[lo].first) cls_ones += obs[hi++].second;
        const long count = static_cast<long>(hi - lo);
        ++out.classes_seen;
        if (count < min_count) {
          ++out.classes_skipped;
        } else {
          ++out.classes_kept;
          alpha = std::min(alpha, static_cast<double>(cls_ones) / static_cast<double>(count));
        }
        lo = hi;
      }
    }
  }
  out.alpha_valid = out.classes_kept > 0;
  out.alpha_hat = out.alpha_valid ? alpha : 0.0;
  return out;
}

RenormReport renorm_pipeline(int d, long big_l, long big_n, double p, double q, double eps,
                             const Frac& delta, long samples, const McKnobs& mc,
                             std::vector<RenormField>* keep_fields) {
  const auto t0 = std::chrono::steady_clock::now();
  const long m = delta.floor_times(big_l);
  if (m < 8)
    throw std::invalid_argument("renorm: block radius floor(delta L) must be at least 8");
  const long n = renorm_grid_radius(big_l, big_n, delta);
  const std::vector<Coords> sites = renorm_sites(d, big_l, big_n, delta);
  const Region region = Region::slab(d, big_l, big_n);

  RunSpec spec;
  spec.region = &region;
  spec.bc = BoundarySpec::free_bc();
  spec.p = p;
  spec.q = q;
  spec.eps = eps;
  spec.mc = mc;

  const long per_stream = chain_per_stream(samples);
  const long total = kEstimatorStreams * per_stream;
  const long side = 2 * n + 1;
  const long n_sites = side * side;

  std::vector<RenormField> fields(static_cast<std::size_t>(total));
  std::vector<std::uint8_t> direct(static_cast<std::size_t>(total), 0);
  std::vector<std::uint8_t> glue0(static_cast<std::size_t>(total), 0);
  std::vector<std::uint8_t> glue_far(static_cast<std::size_t>(total), 0);

  const Coords origin{};
  const Coords x_far = sites[static_cast<std::size_t>(n_sites - 1)];
  const std::vector<int> set0{region.vertex_id(origin)};
  const std::vector<int> set_far{region.vertex_id(x_far)};
  const BondConfig mask0 = box_edge_mask(region, origin, big_l);
  const BondConfig mask_far = box_edge_mask(region, x_far, big_l);

  run_fk_chains(spec, samples,
                [&](int stream, long index, const BondConfig& omega, const BondConfig& gamma) {
                  const std::size_t g = static_cast<std::size_t>(stream * per_stream + index);
                  fields[g] = eta_field(region, omega, gamma, big_l, big_n, delta);
                  fields[g].sample_id = static_cast<long>(g);
                  BondConfig merged = omega;
                  merged |= gamma;
                  direct[g] = sets_connected(region, merged, set0, set_far) ? 1 : 0;
                  glue0[g] = (gamma & mask0) == mask0 ? 1 : 0;
                  glue_far[g] = (gamma & mask_far) == mask_far ? 1 : 0;
                });

  RenormReport rep;
  rep.n = n;
  rep.m = m;
  rep.samples = total;
  rep.stats = eta_statistics(fields, default_far_distance(delta));

  std::vector<long> link(static_cast<std::size_t>(n_sites), 0);
  long n_direct = 0, n_glue0 = 0, n_glue_far = 0;
  for (long g = 0; g < total; ++g) {
    const std::vector<char> seen = reach_from(fields[static_cast<std::size_t>(g)], 0, 0);
    for (long i = 0; i < n_sites; ++i)
      link[static_cast<std::size_t>(i)] += seen[static_cast<std::size_t>(i)];
    n_direct += direct[static_cast<std::size_t>(g)];
    n_glue0 += glue0[static_cast<std::size_t>(g)];
    n_glue_far += glue_far[static_cast<std::size_t>(g)];
  }
  rep.site_link_freq.resize(static_cast<std::size_t>(n_sites));
  for (long i = 0; i < n_sites; ++i)
    rep.site_link_freq[static_cast<std::size_t>(i)] =
        static_cast<double>(link[static_cast<std::size_t>(i)]) / static_cast<double>(total);
  rep.far_link_freq = rep.site_link_freq.back();
  rep.direct_far_freq = static_cast<double>(n_direct) / static_cast<double>(total);
  rep.glue_origin_freq = static_cast<double>(n_glue0) / static_cast<double>(total);
  rep.glue_far_freq = static_cast<double>(n_glue_far) / static_cast<double>(total);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (keep_fields != nullptr) {
    keep_fields->reserve(keep_fields->size() + fields.size());
    for (RenormField& f : fields) keep_fields->push_back(std::move(f));
  }
  return rep;
}

}  // namespace fklab
