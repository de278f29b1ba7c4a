#include "doctest.h"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "fklab/geometry.hpp"

using namespace fklab;

TEST_CASE("box region counts") {
  Region r = Region::box(2, 1);
  CHECK(r.n_vertices() == 9);
  CHECK(r.n_ghosts() == 12);
  CHECK(r.n_edges() == 24);

  // Degree identity: every vertex of Z^d keeps all 2d incident edges.
  int degree_sum = 0;
  for (const auto& e : r.edges()) {
    if (!r.is_ghost(e.a)) ++degree_sum;
    if (!r.is_ghost(e.b)) ++degree_sum;
  }
  CHECK(degree_sum == 9 * 4);

  Region r3 = Region::box(3, 2);
  CHECK(r3.n_vertices() == 125);
  int deg3 = 0;
  for (const auto& e : r3.edges()) {
    if (!r3.is_ghost(e.a)) ++deg3;
    if (!r3.is_ghost(e.b)) ++deg3;
  }
  CHECK(deg3 == 125 * 6);
}

TEST_CASE("vertex ids are stable and invertible") {
  for (const Region& r : {Region::box(2, 2), Region::box(3, 1), Region::slab(3, 1, 2)}) {
    for (int v = 0; v < r.n_vertices(); ++v) {
      CHECK(r.vertex_id(r.site_of(v)) == v);
      CHECK(r.combined_id(r.site_of(v)) == v);
      CHECK_FALSE(r.is_ghost(v));
    }
    for (int g = 0; g < r.n_ghosts(); ++g) {
      int id = r.n_vertices() + g;
      CHECK(r.is_ghost(id));
      CHECK(r.combined_id(r.site_of(id)) == id);
      CHECK_FALSE(r.contains(r.site_of(id)));
    }
  }
}

TEST_CASE("edges are sorted and unique") {
  Region r = Region::box(2, 2);
  std::set<std::pair<int, int>> seen;
  for (const auto& e : r.edges()) {
    const Coords& xa = r.site_of(e.a);
    const Coords& xb = r.site_of(e.b);
    CHECK(std::lexicographical_compare(xa.begin(), xa.end(), xb.begin(), xb.end()));
    bool fresh = seen.insert({e.a, e.b}).second;
    CHECK(fresh);
  }
  // Both endpoints always differ by one step of one axis.
  for (const auto& e : r.edges()) {
    const Coords& xa = r.site_of(e.a);
    const Coords& xb = r.site_of(e.b);
    int diff = 0;
    for (int i = 0; i < r.d(); ++i) diff += std::abs(xa[i] - xb[i]);
    CHECK(diff == 1);
  }
}

TEST_CASE("up_edge covers interior edges exactly once") {
  Region r = Region::box(2, 2);
  std::set<int> found;
  for (int v = 0; v < r.n_vertices(); ++v) {
    for (int ax = 0; ax < r.d(); ++ax) {
      int e = r.up_edge(v, ax);
      if (e >= 0) {
        bool fresh = found.insert(e).second;
        CHECK(fresh);
      }
    }
  }
  // Every edge whose lower endpoint is a region vertex appears.
  int expected = 0;
  for (const auto& e : r.edges()) {
    int lo = r.is_ghost(e.a) ? e.b : e.a;
    const Coords& xl = r.site_of(e.a);
    const Coords& xh = r.site_of(e.b);
    bool a_is_lower = std::lexicographical_compare(xl.begin(), xl.end(), xh.begin(), xh.end());
    int lower = a_is_lower ? e.a : e.b;
    (void)lo;
    if (!r.is_ghost(lower)) ++expected;
  }
  CHECK(static_cast<int>(found.size()) == expected);
}

TEST_CASE("shells and boundaries") {
  Region r = Region::box(2, 3);
  Coords zero = make_coords({0, 0});
  CHECK(r.shell_vertices(zero, 3).size() == 24);
  CHECK(r.shell_vertices(zero, 0).size() == 1);
  CHECK(r.boundary_vertices().size() == 24);
  CHECK(r.box_vertices(zero, 1).size() == 9);

  Coords off = make_coords({2, 2});
  auto near_corner = r.box_vertices(off, 1);
  CHECK(near_corner.size() == 9);  // still inside the region
  CHECK(r.box_inside(zero, 3));
  CHECK_FALSE(r.box_inside(off, 2));
}

TEST_CASE("rect faces") {
  Region r = Region::rect(2, 2, 1);
  CHECK(r.n_vertices() == 15);
  CHECK(r.face("top").size() == 5);
  CHECK(r.face("bot").size() == 5);
  CHECK(r.face("lateral").size() == 2);
  for (int id : r.face("top")) CHECK(r.site_of(id)[1] == 1);
  for (int id : r.face("bot")) CHECK(r.site_of(id)[1] == -1);
  CHECK_THROWS_AS((void)r.face("nope"), std::invalid_argument);

  // Degenerate height: a single layer is its own top and bottom.
  Region flat = Region::rect(2, 2, 0);
  CHECK(flat.face("top") == flat.face("bot"));
  CHECK(flat.face("top").size() == 5);
}

TEST_CASE("half box ghost faces") {
  Region r = Region::half_box(2, 2);
  CHECK(r.n_vertices() == 15);
  auto bottom = r.face("bottom");
  auto rest = r.face("rest");
  CHECK(bottom.size() == 5);
  CHECK(rest.size() == 11);
  for (int id : bottom) {
    CHECK(r.is_ghost(id));
    CHECK(r.site_of(id)[1] == -1);
  }
  for (int id : rest) {
    CHECK(r.is_ghost(id));
    CHECK(r.site_of(id)[1] >= 0);
  }
  CHECK(static_cast<int>(bottom.size() + rest.size()) == r.n_ghosts());
}

TEST_CASE("slab region") {
  Region s = Region::slab(3, 1, 2);
  CHECK(s.n_vertices() == 75);
  CHECK(s.n_edges() == 280);
  CHECK_THROWS_AS(Region::slab(2, 1, 2), std::invalid_argument);
}

TEST_CASE("micro regions") {
  Region e = Region::bare_edge(2);
  CHECK(e.n_vertices() == 2);
  CHECK(e.n_edges() == 1);
  CHECK(e.n_ghosts() == 0);

  Region p = Region::plaquette();
  CHECK(p.n_vertices() == 4);
  CHECK(p.n_edges() == 4);
  CHECK(p.n_ghosts() == 0);
}

TEST_CASE("fractions") {
  CHECK(Frac::parse("1/2").value() == doctest::Approx(0.5));
  CHECK(Frac::parse("2").value() == doctest::Approx(2.0));
  CHECK(Frac::parse("0.25").value() == doctest::Approx(0.25));
  CHECK(Frac::parse("1/2").floor_times(15) == 7);
  CHECK(Frac::parse("1/8").floor_times(16) == 2);
  CHECK(Frac::parse("2").floor_times(5) == 10);
  CHECK_THROWS_AS(Frac::parse("x"), std::invalid_argument);
  CHECK_THROWS_AS(Frac::parse("1/0"), std::invalid_argument);
}

TEST_CASE("annulus schedules") {
  auto a = annulus_sequence(400, Frac::parse("1/2"));
  CHECK(a == std::vector<long>{100, 80, 60});

  auto b = annulus_sequence(100, Frac::parse("2"));
  CHECK(b == std::vector<long>{100, 90, 80, 70, 60, 50});

  CHECK_THROWS_AS(annulus_sequence(16, Frac::parse("1/8")), std::invalid_argument);
}

TEST_CASE("grid boxes") {
  auto g2 = grid_boxes(2, 2, 2, make_coords({0, 0}));
  CHECK(g2.size() == 9);
  auto g3 = grid_boxes(3, 3, 2, make_coords({0, 0, 0}));
  CHECK(g3.size() == 27);
  auto g0 = grid_boxes(2, 0, 5, make_coords({1, 1}));
  REQUIRE(g0.size() == 1);
  CHECK(g0[0] == make_coords({1, 1}));
  // Off-center grids stay multiples of the spacing relative to the center.
  auto gc = grid_boxes(2, 3, 2, make_coords({1, 0}));
  for (const auto& c : gc) {
    CHECK((c[0] - 1) % 2 == 0);
    CHECK(std::abs(c[0] - 1) <= 3);
  }
}

TEST_CASE("region spec round trip") {
  RegionSpec spec{RegionSpec::Kind::Box, 3, 4, 0};
  Region r = Region::make(spec);
  CHECK(r.n_vertices() == 9 * 9 * 9);
  CHECK(r.spec().str() == spec.str());
}
