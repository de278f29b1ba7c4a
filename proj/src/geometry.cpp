#include "fklab/geometry.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace fklab {

namespace {

bool lex_less(const Coords& a, const Coords& b) { return a < b; }

void check_dim(int d) {
  if (d < 2 || d > kMaxDim)
    throw std::invalid_argument("dimension must be in [2, " + std::to_string(kMaxDim) + "]");
}

// Hand-built micro regions may live on the line.
void check_dim_custom(int d) {
  if (d < 1 || d > kMaxDim)
    throw std::invalid_argument("dimension must be in [1, " + std::to_string(kMaxDim) + "]");
}

}  // namespace

long Frac::floor_times(long k) const {
  if (den <= 0) throw std::invalid_argument("fraction denominator must be positive");
  long n = num * k;
  long q = n / den;
  if (n % den != 0 && ((n < 0) != (den < 0))) --q;
  return q;
}

namespace {

// Canonical form, so every spelling of the same rational serializes (and
// hashes) identically.
Frac reduced(long num, long den) {
  long g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Frac{num, den};
}

}  // namespace

Frac Frac::parse(const std::string& text) {
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    long num = std::stol(text.substr(0, slash));
    long den = std::stol(text.substr(slash + 1));
    if (den <= 0) throw std::invalid_argument("bad fraction: " + text);
    return reduced(num, den);
  }
  auto dot = text.find('.');
  if (dot != std::string::npos) {
    std::string frac = text.substr(dot + 1);
    if (frac.size() > 9) throw std::invalid_argument("too many decimal digits: " + text);
    long den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    long whole = dot == 0 ? 0 : std::stol(text.substr(0, dot));
    long part = frac.empty() ? 0 : std::stol(frac);
    bool neg = text.find('-') != std::string::npos;
    long num = std::labs(whole) * den + part;
    return reduced(neg ? -num : num, den);
  }
  return Frac{std::stol(text), 1};
}

std::string Frac::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

std::string RegionSpec::str() const {
  switch (kind) {
    case Kind::Box:
      return "box(d=" + std::to_string(d) + ",N=" + std::to_string(a) + ")";
    case Kind::Slab:
      return "slab(d=" + std::to_string(d) + ",L=" + std::to_string(a) + ",N=" + std::to_string(b) + ")";
    case Kind::Rect:
      return "rect(d=" + std::to_string(d) + ",L=" + std::to_string(a) + ",M=" + std::to_string(b) + ")";
    case Kind::HalfBox:
      return "halfbox(d=" + std::to_string(d) + ",K=" + std::to_string(a) + ")";
    case Kind::Edge:
      return "edge(d=" + std::to_string(d) + ")";
    case Kind::Plaquette:
      return "plaquette";
  }
  return "?";
}

void Region::finish(int d, std::vector<Coords> vertices, bool with_ghost_edges) {
  d_ = d;
  std::sort(vertices.begin(), vertices.end(), lex_less);
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  n_vertices_ = vertices.size();
  sites_ = std::move(vertices);

  // Detect a product-of-ranges vertex set for O(d) id lookup.
  if (!sites_.empty()) {
    lo_ = hi_ = sites_[0];
    for (const auto& s : sites_)
      for (int i = 0; i < d_; ++i) {
        lo_[static_cast<std::size_t>(i)] = std::min(lo_[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(i)]);
        hi_[static_cast<std::size_t>(i)] = std::max(hi_[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(i)]);
      }
    long long vol = 1;
    for (int i = 0; i < d_; ++i)
      vol *= hi_[static_cast<std::size_t>(i)] - lo_[static_cast<std::size_t>(i)] + 1;
    product_range_ = vol == static_cast<long long>(n_vertices_);
  }

  // Collect edges: for every vertex and axis direction, the neighbour is
  // either a vertex (edge recorded once, from its lexicographically smaller
  // endpoint) or outside (ghost edge, if requested).
  struct Raw {
    Coords sa, sb;  // sa < sb lexicographically
    bool b_ghost;
  };
  std::vector<Raw> raw;
  std::vector<Coords> ghosts;
  for (std::size_t vi = 0; vi < n_vertices_; ++vi) {
    const Coords& v = sites_[vi];
    for (int axis = 0; axis < d_; ++axis) {
      for (int dir : {-1, +1}) {
        Coords w = v;
        w[static_cast<std::size_t>(axis)] += dir;
        bool inside = contains(w);
        if (inside) {
          if (lex_less(v, w)) raw.push_back({v, w, false});
        } else if (with_ghost_edges) {
          if (lex_less(v, w))
            raw.push_back({v, w, true});
          else
            raw.push_back({w, v, true});
          ghosts.push_back(w);
        }
      }
    }
  }
  std::sort(ghosts.begin(), ghosts.end(), lex_less);
  ghosts.erase(std::unique(ghosts.begin(), ghosts.end()), ghosts.end());
  sites_.insert(sites_.end(), ghosts.begin(), ghosts.end());

  std::sort(raw.begin(), raw.end(), [](const Raw& x, const Raw& y) {
    if (x.sa != y.sa) return lex_less(x.sa, y.sa);
    return lex_less(x.sb, y.sb);
  });
  edges_.reserve(raw.size());
  for (const Raw& r : raw) {
    Edge e;
    e.a = static_cast<std::int32_t>(combined_id(r.sa));
    e.b = static_cast<std::int32_t>(combined_id(r.sb));
    edges_.push_back(e);
  }

  up_edges_.assign(n_vertices_ * static_cast<std::size_t>(d_), -1);
  for (std::size_t ei = 0; ei < edges_.size(); ++ei) {
    const Edge& e = edges_[ei];
    // Identify the axis and lower endpoint; record under whichever endpoint
    // is a region vertex and is the lower end along the axis.
    const Coords& sa = sites_[static_cast<std::size_t>(e.a)];
    const Coords& sb = sites_[static_cast<std::size_t>(e.b)];
    int axis = -1;
    for (int i = 0; i < d_; ++i)
      if (sa[static_cast<std::size_t>(i)] != sb[static_cast<std::size_t>(i)]) {
        axis = i;
        break;
      }
    const bool a_lower = sa[static_cast<std::size_t>(axis)] < sb[static_cast<std::size_t>(axis)];
    int lower = a_lower ? e.a : e.b;
    if (!is_ghost(lower))
      up_edges_[static_cast<std::size_t>(lower) * static_cast<std::size_t>(d_) +
                static_cast<std::size_t>(axis)] = static_cast<std::int32_t>(ei);
  }
}

bool Region::contains(const Coords& x) const {
  if (product_range_) {
    for (int i = 0; i < d_; ++i)
      if (x[static_cast<std::size_t>(i)] < lo_[static_cast<std::size_t>(i)] ||
          x[static_cast<std::size_t>(i)] > hi_[static_cast<std::size_t>(i)])
        return false;
    for (int i = d_; i < kMaxDim; ++i)
      if (x[static_cast<std::size_t>(i)] != 0) return false;
    return true;
  }
  return vertex_id(x) >= 0;
}

int Region::vertex_id(const Coords& x) const {
  if (product_range_) {
    long long idx = 0;
    for (int i = 0; i < d_; ++i) {
      int lo = lo_[static_cast<std::size_t>(i)], hi = hi_[static_cast<std::size_t>(i)];
      int c = x[static_cast<std::size_t>(i)];
      if (c < lo || c > hi) return -1;
      idx = idx * (hi - lo + 1) + (c - lo);
    }
    for (int i = d_; i < kMaxDim; ++i)
      if (x[static_cast<std::size_t>(i)] != 0) return -1;
    return static_cast<int>(idx);
  }
  auto end = sites_.begin() + static_cast<std::ptrdiff_t>(n_vertices_);
  auto it = std::lower_bound(sites_.begin(), end, x, lex_less);
  if (it != end && *it == x) return static_cast<int>(it - sites_.begin());
  return -1;
}

int Region::combined_id(const Coords& x) const {
  int v = vertex_id(x);
  if (v >= 0) return v;
  auto begin = sites_.begin() + static_cast<std::ptrdiff_t>(n_vertices_);
  auto it = std::lower_bound(begin, sites_.end(), x, lex_less);
  if (it != sites_.end() && *it == x) return static_cast<int>(it - sites_.begin());
  return -1;
}

const std::vector<int>& Region::face(const std::string& name) const {
  auto it = faces_.find(name);
  if (it == faces_.end()) throw std::invalid_argument("region has no face named '" + name + "'");
  return it->second;
}

std::vector<int> Region::boundary_vertices() const {
  std::vector<int> out;
  for (std::size_t vi = 0; vi < n_vertices_; ++vi) {
    const Coords& v = sites_[vi];
    bool boundary = false;
    for (int axis = 0; axis < d_ && !boundary; ++axis)
      for (int dir : {-1, +1}) {
        Coords w = v;
        w[static_cast<std::size_t>(axis)] += dir;
        if (!contains(w)) {
          boundary = true;
          break;
        }
      }
    if (boundary) out.push_back(static_cast<int>(vi));
  }
  return out;
}

std::vector<int> Region::shell_vertices(const Coords& center, long r) const {
  std::vector<int> out;
  if (r < 0) return out;
  // Walk the box and keep the shell; the box volume at desk scales is small
  // enough that this beats bookkeeping a dedicated shell enumeration.
  for (int id : box_vertices(center, r)) {
    const Coords& s = sites_[static_cast<std::size_t>(id)];
    long m = 0;
    for (int i = 0; i < d_; ++i)
      m = std::max(m, static_cast<long>(std::labs(s[static_cast<std::size_t>(i)] -
                                                  center[static_cast<std::size_t>(i)])));
    if (m == r) out.push_back(id);
  }
  return out;
}

std::vector<int> Region::box_vertices(const Coords& center, long r) const {
  std::vector<int> out;
  if (r < 0) return out;
  Coords x{};
  std::array<long, kMaxDim> lo{}, hi{};
  for (int i = 0; i < d_; ++i) {
    lo[static_cast<std::size_t>(i)] = center[static_cast<std::size_t>(i)] - r;
    hi[static_cast<std::size_t>(i)] = center[static_cast<std::size_t>(i)] + r;
  }
  // Odometer over the box, lexicographic order.
  for (int i = 0; i < d_; ++i) x[static_cast<std::size_t>(i)] = static_cast<int>(lo[static_cast<std::size_t>(i)]);
  while (true) {
    int id = vertex_id(x);
    if (id >= 0) out.push_back(id);
    int axis = d_ - 1;
    while (axis >= 0) {
      if (++x[static_cast<std::size_t>(axis)] <= hi[static_cast<std::size_t>(axis)]) break;
      x[static_cast<std::size_t>(axis)] = static_cast<int>(lo[static_cast<std::size_t>(axis)]);
      --axis;
    }
    if (axis < 0) break;
  }
  return out;
}

bool Region::box_inside(const Coords& center, long r) const {
  Coords corner = center;
  // A sup-norm box is inside a product-range region iff its corners are.
  // For non-product regions fall back to full enumeration.
  if (product_range_) {
    for (int signs = 0; signs < (1 << d_); ++signs) {
      for (int i = 0; i < d_; ++i)
        corner[static_cast<std::size_t>(i)] =
            center[static_cast<std::size_t>(i)] + ((signs >> i) & 1 ? +1 : -1) * static_cast<int>(r);
      if (!contains(corner)) return false;
    }
    return true;
  }
  long long vol = 1;
  for (int i = 0; i < d_; ++i) vol *= 2 * r + 1;
  return static_cast<long long>(box_vertices(center, r).size()) == vol;
}

Region Region::box(int d, long n) {
  check_dim(d);
  if (n < 0) throw std::invalid_argument("box radius must be >= 0");
  std::vector<Coords> verts;
  Coords x{};
  for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = static_cast<int>(-n);
  while (true) {
    verts.push_back(x);
    int axis = d - 1;
    while (axis >= 0) {
      if (++x[static_cast<std::size_t>(axis)] <= n) break;
      x[static_cast<std::size_t>(axis)] = static_cast<int>(-n);
      --axis;
    }
    if (axis < 0) break;
  }
  Region r;
  r.spec_ = {RegionSpec::Kind::Box, d, n, 0};
  r.finish(d, std::move(verts), true);
  std::vector<int> bd = r.boundary_vertices();
  r.faces_["boundary"] = bd;
  return r;
}

namespace {

std::vector<Coords> product_sites(int d, const std::array<long, kMaxDim>& lo,
                                  const std::array<long, kMaxDim>& hi) {
  std::vector<Coords> verts;
  Coords x{};
  for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = static_cast<int>(lo[static_cast<std::size_t>(i)]);
  while (true) {
    verts.push_back(x);
    int axis = d - 1;
    while (axis >= 0) {
      if (++x[static_cast<std::size_t>(axis)] <= hi[static_cast<std::size_t>(axis)]) break;
      x[static_cast<std::size_t>(axis)] = static_cast<int>(lo[static_cast<std::size_t>(axis)]);
      --axis;
    }
    if (axis < 0) break;
  }
  return verts;
}

}  // namespace

Region Region::slab(int d, long l, long n) {
  check_dim(d);
  if (d < 3) throw std::invalid_argument("slab requires d >= 3");
  if (l < 0 || n < 0) throw std::invalid_argument("slab sizes must be >= 0");
  std::array<long, kMaxDim> lo{}, hi{};
  for (int i = 0; i < d - 2; ++i) {
    lo[static_cast<std::size_t>(i)] = -l;
    hi[static_cast<std::size_t>(i)] = l;
  }
  for (int i = d - 2; i < d; ++i) {
    lo[static_cast<std::size_t>(i)] = -n;
    hi[static_cast<std::size_t>(i)] = n;
  }
  Region r;
  r.spec_ = {RegionSpec::Kind::Slab, d, l, n};
  r.finish(d, product_sites(d, lo, hi), true);
  r.faces_["boundary"] = r.boundary_vertices();
  return r;
}

Region Region::rect(int d, long l, long m) {
  check_dim(d);
  if (l < 0 || m < 0) throw std::invalid_argument("rect sizes must be >= 0");
  std::array<long, kMaxDim> lo{}, hi{};
  for (int i = 0; i < d - 1; ++i) {
    lo[static_cast<std::size_t>(i)] = -l;
    hi[static_cast<std::size_t>(i)] = l;
  }
  lo[static_cast<std::size_t>(d - 1)] = -m;
  hi[static_cast<std::size_t>(d - 1)] = m;
  Region r;
  r.spec_ = {RegionSpec::Kind::Rect, d, l, m};
  r.finish(d, product_sites(d, lo, hi), true);
  std::vector<int> top, bot, lateral;
  for (int id : r.boundary_vertices()) {
    int xd = r.site_of(id)[static_cast<std::size_t>(d - 1)];
    if (xd == m && m > 0)
      top.push_back(id);
    else if (xd == -m && m > 0)
      bot.push_back(id);
    else if (xd == m)  // m == 0: single layer, split impossible
      top.push_back(id);
    else
      lateral.push_back(id);
  }
  // m == 0 degenerates to one layer; keep top == bot == that layer so both
  // names resolve (disjointness is only promised for m >= 1).
  if (m == 0) bot = top;
  r.faces_["top"] = top;
  r.faces_["bot"] = bot;
  r.faces_["lateral"] = lateral;
  return r;
}

Region Region::half_box(int d, long k) {
  check_dim(d);
  if (k < 0) throw std::invalid_argument("half-box size must be >= 0");
  std::array<long, kMaxDim> lo{}, hi{};
  for (int i = 0; i < d - 1; ++i) {
    lo[static_cast<std::size_t>(i)] = -k;
    hi[static_cast<std::size_t>(i)] = k;
  }
  lo[static_cast<std::size_t>(d - 1)] = 0;
  hi[static_cast<std::size_t>(d - 1)] = k;
  Region r;
  r.spec_ = {RegionSpec::Kind::HalfBox, d, k, 0};
  r.finish(d, product_sites(d, lo, hi), true);
  std::vector<int> bottom, rest;
  for (int id = r.n_vertices(); id < r.n_combined(); ++id) {
    if (r.site_of(id)[static_cast<std::size_t>(d - 1)] == -1)
      bottom.push_back(id);
    else
      rest.push_back(id);
  }
  r.faces_["bottom"] = bottom;
  r.faces_["rest"] = rest;
  return r;
}

Region Region::bare_edge(int d) {
  check_dim(d);
  std::vector<Coords> verts{make_coords({0}), make_coords({1})};
  Region r;
  r.spec_ = {RegionSpec::Kind::Edge, d, 0, 0};
  r.finish(d, std::move(verts), false);
  return r;
}

Region Region::plaquette() {
  std::vector<Coords> verts{make_coords({0, 0}), make_coords({0, 1}), make_coords({1, 0}),
                            make_coords({1, 1})};
  Region r;
  r.spec_ = {RegionSpec::Kind::Plaquette, 2, 0, 0};
  r.finish(2, std::move(verts), false);
  return r;
}

Region Region::make(const RegionSpec& spec) {
  switch (spec.kind) {
    case RegionSpec::Kind::Box:
      return box(spec.d, spec.a);
    case RegionSpec::Kind::Slab:
      return slab(spec.d, spec.a, spec.b);
    case RegionSpec::Kind::Rect:
      return rect(spec.d, spec.a, spec.b);
    case RegionSpec::Kind::HalfBox:
      return half_box(spec.d, spec.a);
    case RegionSpec::Kind::Edge:
      return bare_edge(spec.d);
    case RegionSpec::Kind::Plaquette:
      return plaquette();
  }
  throw std::invalid_argument("unknown region kind");
}

Region Region::from_sites(int d, std::vector<Coords> sites, bool with_ghost_edges) {
  check_dim_custom(d);
  if (sites.empty()) throw std::invalid_argument("empty vertex set");
  Region r;
  r.spec_ = {RegionSpec::Kind::Box, d, -1, -1};
  r.finish(d, std::move(sites), with_ghost_edges);
  return r;
}

std::vector<long> annulus_sequence(long L, const Frac& delta) {
  if (L < 1) throw std::invalid_argument("annulus schedule needs L >= 1");
  if (delta.num <= 0) throw std::invalid_argument("delta must be positive");
  const double sqrt_l = std::sqrt(static_cast<double>(L));
  const double half = delta.value() * static_cast<double>(L) / 2.0;
  const long i_max = static_cast<long>(std::floor(delta.value() * sqrt_l / 4.0));
  if (i_max < 1)
    throw std::invalid_argument("annulus schedule degenerate: fewer than two radii at L=" +
                                std::to_string(L) + ", delta=" + delta.str());
  std::vector<long> radii;
  long prev = 0;
  for (long i = 0; i <= i_max; ++i) {
    long r = round_half_up(half - static_cast<double>(i) * sqrt_l);
    if (r < 1)
      throw std::invalid_argument("annulus schedule reaches radius < 1 at i=" + std::to_string(i));
    if (i > 0 && r >= prev)
      throw std::invalid_argument("annulus schedule radii must decrease strictly");
    radii.push_back(r);
    prev = r;
  }
  return radii;
}

std::vector<Coords> grid_boxes(int d, long R, long ell, const Coords& center) {
  check_dim(d);
  if (ell < 1) throw std::invalid_argument("grid cell must be >= 1");
  if (R < 0) throw std::invalid_argument("grid radius must be >= 0");
  // x = center + ell*u with |x - center|_inf <= R, so |u_i| <= R/ell per axis.
  long kmax = R / ell;
  std::array<long, kMaxDim> klo{}, khi{};
  for (int i = 0; i < d; ++i) {
    klo[static_cast<std::size_t>(i)] = -kmax;
    khi[static_cast<std::size_t>(i)] = kmax;
  }
  std::vector<Coords> out;
  std::array<long, kMaxDim> k = klo;
  while (true) {
    Coords x{};
    for (int i = 0; i < d; ++i)
      x[static_cast<std::size_t>(i)] = static_cast<int>(
          center[static_cast<std::size_t>(i)] + k[static_cast<std::size_t>(i)] * ell);
    out.push_back(x);
    int axis = d - 1;
    while (axis >= 0) {
      if (++k[static_cast<std::size_t>(axis)] <= khi[static_cast<std::size_t>(axis)]) break;
      k[static_cast<std::size_t>(axis)] = klo[static_cast<std::size_t>(axis)];
      --axis;
    }
    if (axis < 0) break;
  }
  return out;
}

}  // namespace fklab
