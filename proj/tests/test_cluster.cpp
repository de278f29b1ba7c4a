#include "doctest.h"

#include <stdexcept>

#include "fklab/cluster.hpp"
#include "fklab/rng.hpp"

using namespace fklab;

TEST_CASE("bond config basics") {
  BondConfig c(70);
  CHECK(c.count_open() == 0);
  c.set(0, true);
  c.set(69, true);
  CHECK(c.get(0));
  CHECK(c.get(69));
  CHECK_FALSE(c.get(1));
  CHECK(c.count_open() == 2);

  std::string hex = c.to_hex();
  BondConfig back = BondConfig::from_hex(70, hex);
  CHECK(back == c);

  BondConfig full(70, true);
  CHECK(full.count_open() == 70);
  full.subtract(c);
  CHECK(full.count_open() == 68);
  CHECK_FALSE(full.get(0));

  CHECK_THROWS_AS(BondConfig::from_hex(70, "zz"), std::invalid_argument);
}

TEST_CASE("box edge mask") {
  Region r = Region::box(2, 2);
  BondConfig mask = box_edge_mask(r, make_coords({0, 0}), 1);
  CHECK(mask.count_open() == 12);
  for (int e = 0; e < r.n_edges(); ++e) {
    if (!mask.get(e)) continue;
    const auto& edge = r.edges()[static_cast<std::size_t>(e)];
    CHECK_FALSE(r.is_ghost(edge.a));
    CHECK_FALSE(r.is_ghost(edge.b));
  }
}

TEST_CASE("cluster counts on the 3x3 box") {
  Region r = Region::box(2, 1);
  BondConfig closed(r.n_edges());

  auto free_lab = label_clusters(r, closed, BoundarySpec::free_bc());
  CHECK(free_lab.k_lambda == 9);
  CHECK(free_lab.k_weight == 9);
  CHECK(free_lab.n_components == 21);  // 9 vertices + 12 lone ghosts

  auto wired_lab = label_clusters(r, closed, BoundarySpec::wired(r));
  CHECK(wired_lab.k_lambda == 9);
  CHECK(wired_lab.k_weight == 10);  // the empty block still carries weight
  CHECK(wired_lab.n_components == 10);

  BondConfig open(r.n_edges(), true);
  auto all_open = label_clusters(r, open, BoundarySpec::free_bc());
  CHECK(all_open.k_lambda == 1);
  CHECK(all_open.k_weight == 1);
  auto all_open_wired = label_clusters(r, open, BoundarySpec::wired(r));
  CHECK(all_open_wired.k_lambda == 1);
  CHECK(all_open_wired.k_weight == 1);
}

TEST_CASE("lone unwired ghosts never carry weight") {
  Region r = Region::box(2, 1);
  BondConfig closed(r.n_edges());
  auto lab = label_clusters(r, closed, BoundarySpec::free_bc());
  for (int g = 0; g < r.n_ghosts(); ++g) CHECK_FALSE(lab.is_counted(r.n_vertices() + g));
  for (int v = 0; v < r.n_vertices(); ++v) CHECK(lab.is_counted(v));
}

TEST_CASE("component ids take the smallest member") {
  Region r = Region::box(2, 1);
  BondConfig open(r.n_edges(), true);
  auto lab = label_clusters(r, open, BoundarySpec::free_bc());
  for (int i = 0; i < r.n_combined(); ++i) CHECK(lab.comp[static_cast<std::size_t>(i)] == 0);
}

TEST_CASE("union-find agrees with breadth-first search") {
  Region r = Region::box(2, 2);
  RngStream rng = RngStream::keyed(7, 0, kPurposeTest);

  BoundarySpec split;
  {
    std::vector<int> lo, hi;
    for (int g = 0; g < r.n_ghosts(); ++g) {
      int id = r.n_vertices() + g;
      (r.site_of(id)[1] >= 0 ? hi : lo).push_back(id);
    }
    split.blocks = {lo, hi};
    split.validate(r);
  }

  for (int trial = 0; trial < 200; ++trial) {
    BondConfig omega(r.n_edges());
    double p = (trial % 5) * 0.25;
    for (int e = 0; e < r.n_edges(); ++e) omega.set(e, rng.bernoulli(p));

    for (const BoundarySpec& bc : {BoundarySpec::free_bc(), BoundarySpec::wired(r), split}) {
      auto a = label_clusters(r, omega, bc);
      auto b = label_clusters_bfs(r, omega, bc);
      CHECK(a.comp == b.comp);
      CHECK(a.counted == b.counted);
      CHECK(a.n_components == b.n_components);
      CHECK(a.k_lambda == b.k_lambda);
      CHECK(a.k_weight == b.k_weight);
    }
  }
}

TEST_CASE("boundary spec validation") {
  Region r = Region::box(2, 1);
  BoundarySpec bad;
  bad.blocks = {{9, 9}};
  CHECK_THROWS_AS(bad.validate(r), std::invalid_argument);
  bad.blocks = {{r.n_combined()}};
  CHECK_THROWS_AS(bad.validate(r), std::invalid_argument);
  bad.blocks = {{}};
  CHECK_THROWS_AS(bad.validate(r), std::invalid_argument);
  bad.blocks = {{0, 1}};
  bad.intensity[0] = 1.5;
  CHECK_THROWS_AS(bad.validate(r), std::invalid_argument);
  bad.intensity[0] = 0.5;
  CHECK_NOTHROW(bad.validate(r));

  auto pe = bad.edge_probabilities(r, 0.6);
  CHECK(pe[0] == doctest::Approx(0.3));
  CHECK(pe[1] == doctest::Approx(0.6));
}

TEST_CASE("sets connected uses internal wiring only") {
  Region r = Region::box(2, 1);
  // Attach the minus-side ghosts and plus-side ghosts as two camps.
  std::vector<int> lo, hi;
  for (int g = 0; g < r.n_ghosts(); ++g) {
    int id = r.n_vertices() + g;
    (r.site_of(id)[1] >= 0 ? hi : lo).push_back(id);
  }

  BondConfig omega(r.n_edges());
  CHECK_FALSE(sets_connected(r, omega, lo, hi));

  // One vertical column of open edges, ghost edges included.
  for (int e = 0; e < r.n_edges(); ++e) {
    const auto& edge = r.edges()[static_cast<std::size_t>(e)];
    if (r.site_of(edge.a)[0] == 0 && r.site_of(edge.b)[0] == 0) omega.set(e, true);
  }
  CHECK(sets_connected(r, omega, lo, hi));
}
