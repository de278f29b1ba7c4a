#include "doctest.h"

#include <cmath>

#include "fklab/oracle.hpp"
#include "fklab/rng.hpp"

using namespace fklab;

TEST_CASE("single free edge at q=2") {
  Region r = Region::bare_edge(2);
  FkModel m{&r, BoundarySpec::free_bc(), 0.5, 2.0};
  CHECK(fk_partition(m) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(fk_edge_marginal(m, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("single wired edge opens with probability p") {
  Region r = Region::bare_edge(2);
  FkModel m{&r, BoundarySpec::wired(r), 0.5, 2.0};
  CHECK(fk_partition(m) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(fk_edge_marginal(m, 0) == doctest::Approx(0.5).epsilon(1e-14));
  m.p = 0.7;
  CHECK(fk_edge_marginal(m, 0) == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("plaquette partition matches the cycle formula") {
  Region r = Region::plaquette();
  double p = 0.3, q = 2.5;
  FkModel m{&r, BoundarySpec::free_bc(), p, q};
  // A 4-cycle by open count: k = 4, 3, 2, 1, 1.
  double expect = std::pow(1 - p, 4) * std::pow(q, 4) + 4 * p * std::pow(1 - p, 3) * std::pow(q, 3) +
                  6 * p * p * std::pow(1 - p, 2) * q * q + 4 * std::pow(p, 3) * (1 - p) * q +
                  std::pow(p, 4) * q;
  CHECK(fk_partition(m) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("two-site wired chain pins the weight convention") {
  // Sites {0, 1} on the line with ghosts at -1 and 2, ghosts wired together.
  Region r = Region::from_sites(1, {make_coords({0}), make_coords({1})}, true);
  REQUIRE(r.n_vertices() == 2);
  REQUIRE(r.n_ghosts() == 2);
  REQUIRE(r.n_edges() == 3);

  FkModel m{&r, BoundarySpec::wired(r), 0.5, 2.0};
  CHECK(fk_partition(m) == doctest::Approx(3.5).epsilon(1e-14));
  // Middle edge is index 1 in site order.
  CHECK(fk_edge_marginal(m, 1) == doctest::Approx(5.0 / 14.0).epsilon(1e-14));

  double link = fk_event_prob(m, [](const BondConfig&, const OracleView& v) { return v.same(0, 1); });
  CHECK(link == doctest::Approx(3.0 / 7.0).epsilon(1e-14));

  // Same quantity through spins: plus boundary at matching temperature.
  IsingModel ising{&r, std::log(2.0) / 2.0, {1, 1}, {}};
  CHECK(ising_two_point(ising, 0, 1) == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("spin correlations equal connection probabilities") {
  Region r = Region::box(2, 1);
  double beta = 0.4;
  double p = 1.0 - std::exp(-2.0 * beta);

  FkModel fk{&r, BoundarySpec::wired(r), p, 2.0};
  IsingModel plus{&r, beta, std::vector<int>(static_cast<std::size_t>(r.n_ghosts()), 1), {}};

  int center = r.vertex_id(make_coords({0, 0}));
  int corner = r.vertex_id(make_coords({1, 1}));
  int side = r.vertex_id(make_coords({-1, 0}));
  int ghost = r.n_vertices();

  auto pair_fk = fk_summary(fk, {
    [&](const BondConfig&, const OracleView& v) { return v.same(center, corner); },
    [&](const BondConfig&, const OracleView& v) { return v.same(center, side); },
    [&](const BondConfig&, const OracleView& v) { return v.same(center, ghost); },
  });
  CHECK(ising_two_point(plus, center, corner) == doctest::Approx(pair_fk.event_prob[0]).epsilon(1e-10));
  CHECK(ising_two_point(plus, center, side) == doctest::Approx(pair_fk.event_prob[1]).epsilon(1e-10));
  double magnet = ising_expectation(plus, [&](const std::vector<int8_t>& s) {
    return static_cast<double>(s[static_cast<std::size_t>(center)]);
  });
  CHECK(magnet == doctest::Approx(pair_fk.event_prob[2]).epsilon(1e-10));

  // Free side: absent ghost spins against the free random-cluster measure.
  FkModel fk_free{&r, BoundarySpec::free_bc(), p, 2.0};
  IsingModel free_model{&r, beta, std::vector<int>(static_cast<std::size_t>(r.n_ghosts()), 0), {}};
  double free_link = fk_event_prob(
      fk_free, [&](const BondConfig&, const OracleView& v) { return v.same(center, corner); });
  CHECK(ising_two_point(free_model, center, corner) == doctest::Approx(free_link).epsilon(1e-10));
}

TEST_CASE("q=1 is independent percolation") {
  Region r = Region::box(2, 1);
  FkModel m{&r, BoundarySpec::free_bc(), 0.37, 1.0};
  FkSummary s = fk_summary(m);
  for (double prob : s.open_prob) CHECK(prob == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("conditional law matches enumerated ratios") {
  Region r = Region::from_sites(
      2, {make_coords({0, 0}), make_coords({0, 1}), make_coords({1, 0}), make_coords({1, 1})}, true);
  REQUIRE(r.n_edges() == 12);
  FkModel m{&r, BoundarySpec::wired(r), 0.6, 3.0};

  RngStream rng = RngStream::keyed(11, 0, kPurposeTest);
  for (int trial = 0; trial < 4; ++trial) {
    std::uint64_t others = rng.next_u64() & ((1ull << 12) - 1);
    int e = static_cast<int>(rng.below(12));
    BondConfig rest = BondConfig::from_bits(12, others & ~(1ull << e));

    auto sum = fk_summary(m, {
      [&](const BondConfig& cfg, const OracleView&) {
        return (cfg.words()[0] | (1ull << e)) == (rest.words()[0] | (1ull << e)) && cfg.get(e);
      },
      [&](const BondConfig& cfg, const OracleView&) {
        return (cfg.words()[0] | (1ull << e)) == (rest.words()[0] | (1ull << e));
      },
    });
    double expect = sum.event_prob[0] / sum.event_prob[1];
    CHECK(fk_conditional_open(m, e, rest) == doctest::Approx(expect).epsilon(1e-11));
  }
}

TEST_CASE("zero intensity on ghost bonds reproduces the free measure") {
  Region r = Region::from_sites(1, {make_coords({0}), make_coords({1})}, true);
  BoundarySpec wired = BoundarySpec::wired(r);
  wired.intensity[0] = 0.0;
  wired.intensity[2] = 0.0;
  FkModel muted{&r, wired, 0.5, 2.0};
  FkModel free_m{&r, BoundarySpec::free_bc(), 0.5, 2.0};
  CHECK(fk_edge_marginal(muted, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  CHECK(fk_edge_marginal(free_m, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("summary stays coherent") {
  Region r = Region::plaquette();
  FkModel m{&r, BoundarySpec::free_bc(), 0.45, 1.7};
  FkSummary s = fk_summary(m, {[](const BondConfig&, const OracleView&) { return true; }});
  CHECK(s.event_prob[0] == doctest::Approx(1.0).epsilon(1e-14));
  for (int e = 0; e < r.n_edges(); ++e)
    CHECK(fk_edge_marginal(m, e) == doctest::Approx(s.open_prob[static_cast<std::size_t>(e)]));
}

TEST_CASE("enumeration caps are hard errors") {
  Region big = Region::box(2, 2);
  FkModel m{&big, BoundarySpec::free_bc(), 0.5, 2.0};
  CHECK_THROWS_AS(fk_partition(m), CapExceeded);

  IsingModel im{&big, 0.3, {}, {}};
  CHECK_THROWS_AS(ising_partition(im), CapExceeded);
}

TEST_CASE("spin oracle closed forms") {
  Region r = Region::bare_edge(2);
  IsingModel m{&r, 0.7, {}, {}};
  CHECK(ising_partition(m) == doctest::Approx(2.0 * std::exp(0.7) + 2.0 * std::exp(-0.7)).epsilon(1e-14));
  CHECK(ising_two_point(m, 0, 1) == doctest::Approx(std::tanh(0.7)).epsilon(1e-14));

  m.coupling = {2.0};
  CHECK(ising_two_point(m, 0, 1) == doctest::Approx(std::tanh(1.4)).epsilon(1e-14));

  Region site = Region::from_sites(1, {make_coords({0})}, true);
  REQUIRE(site.n_ghosts() == 2);
  IsingModel field{&site, 0.3, {1, 0}, {}};
  double mean = ising_expectation(field, [](const std::vector<int8_t>& s) {
    return static_cast<double>(s[0]);
  });
  CHECK(mean == doctest::Approx(std::tanh(0.3)).epsilon(1e-14));
}
