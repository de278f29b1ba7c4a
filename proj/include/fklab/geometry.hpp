#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <string>
#include <vector>

namespace fklab {

/*
 * Lattice conventions used throughout:
 *
 *  - A region is a finite vertex set V in Z^d together with its edge set
 *    E = all nearest-neighbour edges of Z^d with at least one endpoint in V.
 *    Endpoints of boundary-crossing edges that lie outside V are stored as
 *    "ghost" vertices.  Every ghost of the shipped region kinds has exactly
 *    one incident edge.
 *
 *  - Combined vertex ids: 0..nv-1 are region vertices in lexicographic
 *    coordinate order, nv..nv+ng-1 are ghosts, again lexicographic.  Edge i
 *    joins edges_[i].a < edges_[i].b in *site* lexicographic order, and the
 *    edge list itself is sorted by (site(a), site(b)), so the index of an
 *    edge is a pure function of its endpoints.
 *
 *  - Boxes are sup-norm balls: box(c, r) = {x : |x - c|_inf <= r}.  The
 *    boundary of a box always means the inner vertex boundary, i.e. the
 *    shell |x - c|_inf == r.
 *
 *  - Derived radii: half/quarter/eighth scales (L/2, L/4, L/8, dL/2 for a
 *    rational d) round down; the annulus schedule radii round to nearest
 *    with ties toward +infinity.
 */

inline constexpr int kMaxDim = 6;

// Coordinates of one site; entries beyond the region dimension stay zero.
using Coords = std::array<int, kMaxDim>;

inline Coords make_coords(std::initializer_list<int> v) {
  Coords c{};
  int i = 0;
  for (int x : v) c[static_cast<std::size_t>(i++)] = x;
  return c;
}

// Exact rational parameter (delta, C, ...).  Kept exact so derived integer
// radii are reproducible.
struct Frac {
  long num = 0;
  long den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  // floor(num*k/den) for integer k, exact.
  long floor_times(long k) const;
  static Frac parse(const std::string& text);  // "1/2", "2", "0.25"
  std::string str() const;
};

// round(x) with ties toward +infinity.
inline long round_half_up(double x) {
  return static_cast<long>(std::floor(x + 0.5));
}

struct RegionSpec {
  enum class Kind { Box, Slab, Rect, HalfBox, Edge, Plaquette };
  Kind kind = Kind::Box;
  int d = 2;
  long a = 0;  // Box: N, Slab: L, Rect: L, HalfBox: K
  long b = 0;  // Slab: N, Rect: M

  std::string str() const;
};

class Region {
 public:
  struct Edge {
    std::int32_t a = -1;  // combined id, site(a) < site(b) lexicographically
    std::int32_t b = -1;
  };

  // Lambda_N = {-N..N}^d.  Faces: "boundary" (inner vertex boundary).
  static Region box(int d, long n);
  // S(L,N) = {-L..L}^{d-2} x {-N..N}^2, d >= 3.  Faces: "boundary".
  static Region slab(int d, long l, long n);
  // R(L,M) = {-L..L}^{d-1} x {-M..M}.  Faces: "top" and "bot" are the full
  // vertex layers at x_d = +-M, "lateral" the rest of the inner boundary.
  static Region rect(int d, long l, long m);
  // H(K) = {-K..K}^{d-1} x {0..K}.  Faces "bottom" and "rest" partition the
  // ghost set; "bottom" is the ghost layer at x_d = -1.
  static Region half_box(int d, long k);
  // Micro regions for oracle work: a single edge {0, e_1} with no ghosts,
  // and the unit 4-cycle (plaquette) with no ghosts.
  static Region bare_edge(int d = 2);
  static Region plaquette();
  static Region make(const RegionSpec& spec);
  // Arbitrary vertex set; with_ghost_edges selects whether boundary-crossing
  // edges (and their ghosts) are generated.  Intended for tests.
  static Region from_sites(int d, std::vector<Coords> sites, bool with_ghost_edges);

  int d() const { return d_; }
  const RegionSpec& spec() const { return spec_; }
  int n_vertices() const { return static_cast<int>(n_vertices_); }
  int n_ghosts() const { return static_cast<int>(sites_.size() - n_vertices_); }
  int n_combined() const { return static_cast<int>(sites_.size()); }
  int n_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Coords& site_of(int id) const { return sites_[static_cast<std::size_t>(id)]; }
  bool is_ghost(int id) const { return id >= static_cast<int>(n_vertices_); }

  bool contains(const Coords& x) const;          // region vertex?
  int vertex_id(const Coords& x) const;          // -1 if not a region vertex
  int combined_id(const Coords& x) const;        // vertices and ghosts, -1 if absent
  // Edge id of (v, v + e_axis) where v is a vertex id; -1 if that edge does
  // not exist (it always exists when v is a region vertex, possibly as a
  // ghost edge).
  int up_edge(int vertex_id, int axis) const {
    return up_edges_[static_cast<std::size_t>(vertex_id) * static_cast<std::size_t>(d_) +
                     static_cast<std::size_t>(axis)];
  }

  const std::map<std::string, std::vector<int>>& faces() const { return faces_; }
  const std::vector<int>& face(const std::string& name) const;

  // Inner vertex boundary of the region itself.
  std::vector<int> boundary_vertices() const;
  // Vertex ids on the shell |x - center|_inf == r (clipped to the region).
  std::vector<int> shell_vertices(const Coords& center, long r) const;
  // Vertex ids in box(center, r) (clipped to the region).
  std::vector<int> box_vertices(const Coords& center, long r) const;
  // True if box(center, r) lies entirely inside the region.
  bool box_inside(const Coords& center, long r) const;

 private:
  Region() = default;
  void finish(int d, std::vector<Coords> vertices, bool with_ghost_edges);

  int d_ = 0;
  RegionSpec spec_{};
  std::size_t n_vertices_ = 0;
  std::vector<Coords> sites_;  // vertices then ghosts, each block sorted
  std::vector<Edge> edges_;
  std::vector<std::int32_t> up_edges_;
  std::map<std::string, std::vector<int>> faces_;
  // Fast-path row-major index for product-of-ranges vertex sets.
  bool product_range_ = false;
  std::array<int, kMaxDim> lo_{}, hi_{};
};

// Sup-norm annulus box(center, outer) \ box(center, inner), 0 <= inner < outer.
struct AnnulusSpec {
  long inner = 0;
  long outer = 0;
};

// Radii r_i = round(delta*L/2 - i*sqrt(L)), ties toward +infinity, for
// 0 <= i <= floor(delta*sqrt(L)/4).  Rejects schedules that are degenerate
// (fewer than two radii) or reach below radius 1.
std::vector<long> annulus_sequence(long L, const Frac& delta);

// Centers x in ell*Z^d with |x - center|_inf <= R; each is the center of a
// box of radius ell.
std::vector<Coords> grid_boxes(int d, long R, long ell, const Coords& center);

}  // namespace fklab
