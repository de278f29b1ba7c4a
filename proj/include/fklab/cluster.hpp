#pragma once

#include <cstdint>
#include <vector>

#include "fklab/bond_config.hpp"
#include "fklab/geometry.hpp"

namespace fklab {

// Union-find with union by size and path halving.  Reusable: reset(n) keeps
// capacity across calls.
class UnionFind {
 public:
  void reset(int n);
  int find(int x);
  // Returns true if a and b were in different classes.
  bool unite(int a, int b);
  bool connected(int a, int b) { return find(a) == find(b); }
  int size() const { return static_cast<int>(parent_.size()); }

 private:
  std::vector<int32_t> parent_;
  std::vector<int32_t> count_;
};

// Connected components of (open edges) + (wiring blocks) over a region's
// combined ids.  Component ids are normalized to the smallest member id, so
// labelings are comparable across implementations.
//
// Two cluster counts matter and they differ:
//   k_lambda  components containing at least one region vertex
//   k_weight  components carrying weight in the random-cluster measure:
//             those containing a region vertex, plus wiring blocks whose
//             component contains none (an isolated block still counts once;
//             an unwired ghost on its own never counts)
struct ClusterLabeling {
  std::vector<int32_t> comp;  // combined id -> component id (min member)
  std::vector<char> counted;  // indexed by component id, see k_weight above
  int n_components = 0;       // all components, counted or not
  int k_lambda = 0;
  int k_weight = 0;

  bool same(int a, int b) const {
    return comp[static_cast<std::size_t>(a)] == comp[static_cast<std::size_t>(b)];
  }
  bool is_counted(int id) const {
    return counted[static_cast<std::size_t>(comp[static_cast<std::size_t>(id)])] != 0;
  }
};

ClusterLabeling label_clusters(const Region& region, const BondConfig& omega,
                               const BoundarySpec& bc);

// Breadth-first reference implementation with identical output; kept for
// cross-checking the union-find path.
ClusterLabeling label_clusters_bfs(const Region& region, const BondConfig& omega,
                                   const BoundarySpec& bc);

// True iff some component meets both id sets.  Ids are combined ids, so a
// wired ghost block can be named by any of its members.
bool is_connected(const ClusterLabeling& labeling, const std::vector<int>& a,
                  const std::vector<int>& b);

// Components with a vertex on each boundary shell of the annulus.  The
// labeling decides what "cluster" means; pass a labeling of the restricted
// configuration for subgraph events.
std::vector<int> crossing_clusters(const Region& region, const ClusterLabeling& labeling,
                                   const AnnulusSpec& annulus, const Coords& center = Coords{});

// Components meeting the shell at radius mid, plus the sub-family meeting
// box(center, r) for each requested radius r.
struct BoundaryClusters {
  std::vector<int> ids;
  std::vector<std::vector<int>> per_radius;
};
BoundaryClusters boundary_clusters(const Region& region, const ClusterLabeling& labeling,
                                   long mid, const std::vector<long>& radii = {},
                                   const Coords& center = Coords{});

// Connectivity between two id sets through open edges plus the internal
// wiring of each set (but no wiring across sets).
bool sets_connected(const Region& region, const BondConfig& omega,
                    const std::vector<int>& a, const std::vector<int>& b);

}  // namespace fklab
