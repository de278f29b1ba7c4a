#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fklab/bond_config.hpp"
#include "fklab/cluster.hpp"
#include "fklab/geometry.hpp"

namespace fklab {

// Exact enumeration is the ground truth everything else is checked against.
// It stays honest by staying small: these caps are hard errors, not knobs.
inline constexpr int kMaxOracleEdges = 24;
inline constexpr int kMaxOracleSpins = 20;

struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FkModel {
  const Region* region = nullptr;
  BoundarySpec bc;
  double p = 0.5;
  double q = 2.0;
};

// Connectivity view handed to event predicates during enumeration.  Valid
// only inside the callback.
class OracleView {
 public:
  OracleView(const std::vector<int32_t>& root, const std::vector<char>& flags)
      : root_(root), flags_(flags) {}
  bool same(int a, int b) const {
    return root_[static_cast<std::size_t>(a)] == root_[static_cast<std::size_t>(b)];
  }
  // Component carries weight (meets the region or a wired block).
  bool counted(int id) const {
    return (flags_[static_cast<std::size_t>(root_[static_cast<std::size_t>(id)])] & 3) != 0;
  }

 private:
  const std::vector<int32_t>& root_;
  const std::vector<char>& flags_;
};

using FkPredicate = std::function<bool(const BondConfig&, const OracleView&)>;

struct FkSummary {
  double z = 0.0;
  std::vector<double> open_prob;   // per edge
  std::vector<double> event_prob;  // per requested predicate
};

// One full pass over all 2^edges configurations.
FkSummary fk_summary(const FkModel& model, const std::vector<FkPredicate>& events = {});

double fk_partition(const FkModel& model);
double fk_edge_marginal(const FkModel& model, int e);
double fk_event_prob(const FkModel& model, const FkPredicate& event);

// Probability that edge e is open given the state of every other edge.
double fk_conditional_open(const FkModel& model, int e, const BondConfig& others);

struct IsingModel {
  const Region* region = nullptr;
  double beta = 0.0;
  // Per ghost: +1 or -1 pins the ghost spin; 0 removes its edge entirely.
  std::vector<int> ghost_spin;
  // Optional per-edge coupling multiplier (energy beta * coupling_e * s_a *
  // s_b); empty means 1 everywhere.
  std::vector<double> coupling;
};

using SpinFn = std::function<double(const std::vector<int8_t>&)>;

double ising_partition(const IsingModel& model);
// <f(sigma)> where f sees spins indexed by combined id (ghost entries hold
// their pinned value, 0 when absent).
double ising_expectation(const IsingModel& model, const SpinFn& f);
double ising_two_point(const IsingModel& model, int a, int b);

}  // namespace fklab
