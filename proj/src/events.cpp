#include "fklab/events.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "fklab/cluster.hpp"

namespace fklab {
namespace {

// Row-major local indexing over box(center, r).  All event work happens on
// such boxes, so cluster passes can use dense arrays of the box volume
// instead of region-sized scratch.
struct LocalBox {
  int d = 0;
  long r = 0;
  Coords center{};
  long side = 1;
  long volume = 1;
  std::array<long, kMaxDim> stride{};

  LocalBox(int dim, const Coords& c, long radius) : d(dim), r(radius), center(c) {
    side = 2 * radius + 1;
    long s = 1;
    for (int i = dim - 1; i >= 0; --i) {
      stride[static_cast<std::size_t>(i)] = s;
      s *= side;
    }
    volume = s;
  }

  long sup_dist(const Coords& x) const {
    long m = 0;
    for (int i = 0; i < d; ++i) {
      long a = std::labs(static_cast<long>(x[static_cast<std::size_t>(i)]) -
                         static_cast<long>(center[static_cast<std::size_t>(i)]));
      m = std::max(m, a);
    }
    return m;
  }

  long index(const Coords& x) const {
    long idx = 0;
    for (int i = 0; i < d; ++i) {
      idx += (static_cast<long>(x[static_cast<std::size_t>(i)]) -
              static_cast<long>(center[static_cast<std::size_t>(i)]) + r) *
             stride[static_cast<std::size_t>(i)];
    }
    return idx;
  }

  // Walk all sites in row-major order (last axis fastest) and call
  // fn(coords, local_index).
  template <typename Fn>
  void for_each(Fn&& fn) const {
    Coords x = center;
    for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] -= static_cast<int>(r);
    long idx = 0;
    for (;;) {
      fn(static_cast<const Coords&>(x), idx);
      ++idx;
      int ax = d - 1;
      for (; ax >= 0; --ax) {
        auto& c = x[static_cast<std::size_t>(ax)];
        if (c < center[static_cast<std::size_t>(ax)] + r) {
          ++c;
          break;
        }
        c = static_cast<int>(center[static_cast<std::size_t>(ax)] - r);
      }
      if (ax < 0) return;
    }
  }
};

void require_box(const Region& region, const Coords& center, long r, const char* what) {
  if (!region.box_inside(center, r)) {
    throw std::invalid_argument(std::string(what) + ": box of radius " + std::to_string(r) +
                                " does not fit inside the region");
  }
}

// Unions over edges internal to the box.  open(edge_id) decides openness;
// the +axis neighbor's local index is idx + stride[axis].
template <typename Open>
void unite_box_edges(const Region& region, const LocalBox& box, UnionFind& uf, Open&& open) {
  const int d = box.d;
  box.for_each([&](const Coords& x, long idx) {
    const int v = region.vertex_id(x);
    for (int ax = 0; ax < d; ++ax) {
      if (x[static_cast<std::size_t>(ax)] >= box.center[static_cast<std::size_t>(ax)] + box.r)
        continue;
      const int e = region.up_edge(v, ax);
      if (open(e)) {
        uf.unite(static_cast<int>(idx),
                 static_cast<int>(idx + box.stride[static_cast<std::size_t>(ax)]));
      }
    }
  });
}

// Shared core of the uniqueness checks: label omega inside box(center, m),
// flag which clusters touch which shells, then (optionally) merge the
// annulus-crossing clusters through (omega or gamma) inside box(center, m/2).
struct UniqueScan {
  bool crossing = false;  // part (a)
  int n_annulus = 0;      // clusters crossing the m/4..m/2 annulus
  bool merged = false;    // part (b), meaningful when n_annulus > 0
};

UniqueScan unique_scan(const Region& region, const BondConfig& omega, const BondConfig* gamma,
                       const Coords& center, long m) {
  if (m < 8) throw std::invalid_argument("unique event: box radius must be at least 8");
  require_box(region, center, m, "unique event");
  const long r8 = m / 8, r4 = m / 4, r2 = m / 2;

  LocalBox box(region.d(), center, m);
  UnionFind uf;
  uf.reset(static_cast<int>(box.volume));
  unite_box_edges(region, box, uf, [&](int e) { return omega.get(e); });

  // Shell incidence per root: eighth, quarter, half, full.
  std::vector<unsigned char> touch(static_cast<std::size_t>(box.volume), 0);
  box.for_each([&](const Coords& x, long idx) {
    const long dist = box.sup_dist(x);
    unsigned char bit = 0;
    if (dist == r8) bit |= 1;
    if (dist == r4) bit |= 2;
    if (dist == r2) bit |= 4;
    if (dist == m) bit |= 8;
    if (bit) touch[static_cast<std::size_t>(uf.find(static_cast<int>(idx)))] |= bit;
  });

  UniqueScan out;
  std::vector<int32_t> annulus_roots;
  for (long i = 0; i < box.volume; ++i) {
    const unsigned char t = touch[static_cast<std::size_t>(i)];
    if ((t & 1) && (t & 8)) out.crossing = true;
    if ((t & 2) && (t & 4)) annulus_roots.push_back(static_cast<int32_t>(i));
  }
  out.n_annulus = static_cast<int>(annulus_roots.size());
  if (gamma == nullptr || out.n_annulus <= 1) {
    out.merged = out.n_annulus <= 1;
    return out;
  }

  // Merge pass: connectivity of (omega or gamma) restricted to box(center, m/2).
  LocalBox half(region.d(), center, r2);
  UnionFind uf2;
  uf2.reset(static_cast<int>(half.volume));
  unite_box_edges(region, half, uf2, [&](int e) { return omega.get(e) || gamma->get(e); });

  // Every crossing cluster has vertices in the half box (both its shells lie
  // inside).  Clusters count as connected to each other when some component
  // of the restricted graph meets both; the event asks this for every pair.
  std::vector<int32_t> annulus_index(static_cast<std::size_t>(box.volume), -1);
  for (std::size_t i = 0; i < annulus_roots.size(); ++i)
    annulus_index[static_cast<std::size_t>(annulus_roots[i])] = static_cast<int32_t>(i);
  std::vector<std::vector<int32_t>> meets(annulus_roots.size());
  half.for_each([&](const Coords& x, long idx) {
    const int root = uf.find(static_cast<int>(box.index(x)));
    const int32_t a = annulus_index[static_cast<std::size_t>(root)];
    if (a < 0) return;
    auto& set = meets[static_cast<std::size_t>(a)];
    const int32_t mroot = uf2.find(static_cast<int>(idx));
    if (std::find(set.begin(), set.end(), mroot) == set.end()) set.push_back(mroot);
  });
  out.merged = true;
  for (std::size_t i = 0; i + 1 < meets.size() && out.merged; ++i) {
    for (std::size_t j = i + 1; j < meets.size() && out.merged; ++j) {
      bool share = false;
      for (int32_t c : meets[i]) {
        if (std::find(meets[j].begin(), meets[j].end(), c) != meets[j].end()) {
          share = true;
          break;
        }
      }
      if (!share) out.merged = false;
    }
  }
  return out;
}

}  // namespace

bool density_event(const Region& region, const BondConfig& omega, long ell, long r_inner,
                   long r_outer) {
  if (ell < 1 || ell > r_inner || r_inner >= r_outer) {
    throw std::invalid_argument("density_event: need 1 <= ell <= r_inner < r_outer");
  }
  Coords origin{};
  require_box(region, origin, r_outer, "density_event");

  LocalBox box(region.d(), origin, r_outer);
  UnionFind uf;
  uf.reset(static_cast<int>(box.volume));
  unite_box_edges(region, box, uf, [&](int e) { return omega.get(e); });

  // Roots whose cluster touches the outer shell.
  std::vector<char> reaches(static_cast<std::size_t>(box.volume), 0);
  box.for_each([&](const Coords& x, long idx) {
    if (box.sup_dist(x) == r_outer)
      reaches[static_cast<std::size_t>(uf.find(static_cast<int>(idx)))] = 1;
  });

  for (const Coords& c : grid_boxes(region.d(), r_inner, ell, origin)) {
    LocalBox cell(region.d(), c, ell);
    bool ok = false;
    cell.for_each([&](const Coords& x, long) {
      if (ok || box.sup_dist(x) > r_outer) return;
      if (reaches[static_cast<std::size_t>(uf.find(static_cast<int>(box.index(x))))]) ok = true;
    });
    if (!ok) return false;
  }
  return true;
}

bool unique_crossing_exists(const Region& region, const BondConfig& omega, const Coords& center,
                            long m) {
  return unique_scan(region, omega, nullptr, center, m).crossing;
}

bool unique_event(const Region& region, const BondConfig& omega, const BondConfig& gamma,
                  const Coords& center, long m) {
  const UniqueScan scan = unique_scan(region, omega, &gamma, center, m);
  return scan.crossing && scan.merged;
}

USequence u_sequence_with_radii(const Region& region, const BondConfig& omega,
                                const BondConfig& gamma, long box_radius,
                                const std::vector<long>& radii) {
  const long mid = box_radius / 2;
  if (box_radius < 2 || mid < 1)
    throw std::invalid_argument("u_sequence: box radius must be at least 2");
  if (radii.empty()) throw std::invalid_argument("u_sequence: empty radius schedule");
  if (radii.front() > (box_radius + 1) / 2)
    throw std::invalid_argument("u_sequence: first radius exceeds half the box");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] < 1 || (i > 0 && radii[i] >= radii[i - 1]))
      throw std::invalid_argument("u_sequence: radii must be strictly decreasing and >= 1");
  }
  Coords origin{};
  require_box(region, origin, box_radius, "u_sequence");

  // Clusters of omega inside the outer box, flagged by whether they meet the
  // mid shell and by the innermost schedule box they still reach.
  LocalBox box(region.d(), origin, box_radius);
  UnionFind uf;
  uf.reset(static_cast<int>(box.volume));
  unite_box_edges(region, box, uf, [&](int e) { return omega.get(e); });

  const long kNoDist = box_radius + 1;
  std::vector<long> min_dist(static_cast<std::size_t>(box.volume), kNoDist);
  std::vector<char> on_mid(static_cast<std::size_t>(box.volume), 0);
  box.for_each([&](const Coords& x, long idx) {
    const long dist = box.sup_dist(x);
    const int root = uf.find(static_cast<int>(idx));
    min_dist[static_cast<std::size_t>(root)] = std::min(min_dist[static_cast<std::size_t>(root)], dist);
    if (dist == mid) on_mid[static_cast<std::size_t>(root)] = 1;
  });

  USequence seq;
  seq.box_radius = box_radius;
  seq.radii = radii;

  LocalBox half(region.d(), origin, mid);
  UnionFind uf2;
  UnionFind classes;
  std::vector<int32_t> member_index(static_cast<std::size_t>(box.volume), -1);
  std::vector<int32_t> rep(static_cast<std::size_t>(half.volume), -1);

  const long r0 = radii.front();
  for (long ri : radii) {
    // Members this step: mid-shell clusters still reaching box(r_i).
    std::fill(member_index.begin(), member_index.end(), -1);
    int n_members = 0;
    for (long i = 0; i < box.volume; ++i) {
      if (on_mid[static_cast<std::size_t>(i)] && min_dist[static_cast<std::size_t>(i)] <= ri)
        member_index[static_cast<std::size_t>(i)] = n_members++;
    }
    if (n_members == 0) {
      seq.counts.push_back(0);
      continue;
    }

    // Helper bonds live in box(r0) but not box(r_i); connectivity is read
    // inside the mid box.
    uf2.reset(static_cast<int>(half.volume));
    unite_box_edges(region, half, uf2, [&](int e) {
      if (omega.get(e)) return true;
      if (!gamma.get(e)) return false;
      const auto& ed = region.edges()[static_cast<std::size_t>(e)];
      const long da = box.sup_dist(region.site_of(ed.a));
      const long db = box.sup_dist(region.site_of(ed.b));
      const long lo = std::max(da, db);
      return lo <= r0 && lo > ri;
    });

    classes.reset(n_members);
    std::fill(rep.begin(), rep.end(), -1);
    int n_classes = n_members;
    half.for_each([&](const Coords& x, long idx) {
      const int root = uf.find(static_cast<int>(box.index(x)));
      const int32_t a = member_index[static_cast<std::size_t>(root)];
      if (a < 0) return;
      const int mroot = uf2.find(static_cast<int>(idx));
      if (rep[static_cast<std::size_t>(mroot)] < 0) {
        rep[static_cast<std::size_t>(mroot)] = a;
      } else if (classes.unite(rep[static_cast<std::size_t>(mroot)], a)) {
        --n_classes;
      }
    });
    seq.counts.push_back(n_classes);
  }
  return seq;
}

USequence u_sequence(const Region& region, const BondConfig& omega, const BondConfig& gamma,
                     long big_l, const Frac& delta) {
  return u_sequence_with_radii(region, omega, gamma, delta.floor_times(big_l),
                               annulus_sequence(big_l, delta));
}

}  // namespace fklab
