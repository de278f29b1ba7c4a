#include "fklab/cluster.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace fklab {

void UnionFind::reset(int n) {
  parent_.resize(static_cast<std::size_t>(n));
  count_.assign(static_cast<std::size_t>(n), 1);
  for (int i = 0; i < n; ++i) parent_[static_cast<std::size_t>(i)] = i;
}

int UnionFind::find(int x) {
  while (parent_[static_cast<std::size_t>(x)] != x) {
    parent_[static_cast<std::size_t>(x)] =
        parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
    x = parent_[static_cast<std::size_t>(x)];
  }
  return x;
}

bool UnionFind::unite(int a, int b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (count_[static_cast<std::size_t>(a)] < count_[static_cast<std::size_t>(b)]) std::swap(a, b);
  parent_[static_cast<std::size_t>(b)] = a;
  count_[static_cast<std::size_t>(a)] += count_[static_cast<std::size_t>(b)];
  return true;
}

namespace {

// Shared tail: turn per-id roots into min-member component ids and compute
// the two counts.  root_of must already reflect omega plus the wiring.
ClusterLabeling finish_labeling(const Region& region, const BoundarySpec& bc,
                                const std::vector<int32_t>& root_of) {
  int n = region.n_combined();
  ClusterLabeling lab;
  lab.comp.assign(static_cast<std::size_t>(n), -1);
  lab.counted.assign(static_cast<std::size_t>(n), 0);

  std::vector<int32_t> min_of(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    int r = root_of[static_cast<std::size_t>(i)];
    if (min_of[static_cast<std::size_t>(r)] < 0) {
      min_of[static_cast<std::size_t>(r)] = i;
      ++lab.n_components;
    }
    lab.comp[static_cast<std::size_t>(i)] = min_of[static_cast<std::size_t>(r)];
  }

  std::vector<char> has_lambda(static_cast<std::size_t>(n), 0);
  std::vector<char> has_block(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < region.n_vertices(); ++v)
    has_lambda[static_cast<std::size_t>(lab.comp[static_cast<std::size_t>(v)])] = 1;
  for (const auto& block : bc.blocks)
    for (int id : block)
      has_block[static_cast<std::size_t>(lab.comp[static_cast<std::size_t>(id)])] = 1;

  for (int i = 0; i < n; ++i) {
    if (lab.comp[static_cast<std::size_t>(i)] != i) continue;  // roots only
    bool lam = has_lambda[static_cast<std::size_t>(i)] != 0;
    bool blk = has_block[static_cast<std::size_t>(i)] != 0;
    if (lam) ++lab.k_lambda;
    if (lam || blk) {
      ++lab.k_weight;
      lab.counted[static_cast<std::size_t>(i)] = 1;
    }
  }
  return lab;
}

}  // namespace

ClusterLabeling label_clusters(const Region& region, const BondConfig& omega,
                               const BoundarySpec& bc) {
  if (omega.n_edges() != region.n_edges())
    throw std::invalid_argument("label_clusters: config does not match region");
  int n = region.n_combined();
  UnionFind uf;
  uf.reset(n);
  const auto& edges = region.edges();
  for (int e = 0; e < region.n_edges(); ++e)
    if (omega.get(e)) uf.unite(edges[static_cast<std::size_t>(e)].a, edges[static_cast<std::size_t>(e)].b);
  for (const auto& block : bc.blocks)
    for (std::size_t i = 1; i < block.size(); ++i) uf.unite(block[0], block[i]);

  std::vector<int32_t> root_of(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) root_of[static_cast<std::size_t>(i)] = uf.find(i);
  return finish_labeling(region, bc, root_of);
}

ClusterLabeling label_clusters_bfs(const Region& region, const BondConfig& omega,
                                   const BoundarySpec& bc) {
  if (omega.n_edges() != region.n_edges())
    throw std::invalid_argument("label_clusters_bfs: config does not match region");
  int n = region.n_combined();

  // Adjacency from open edges plus a star over each block.
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  const auto& edges = region.edges();
  for (int e = 0; e < region.n_edges(); ++e) {
    if (!omega.get(e)) continue;
    adj[static_cast<std::size_t>(edges[static_cast<std::size_t>(e)].a)].push_back(edges[static_cast<std::size_t>(e)].b);
    adj[static_cast<std::size_t>(edges[static_cast<std::size_t>(e)].b)].push_back(edges[static_cast<std::size_t>(e)].a);
  }
  for (const auto& block : bc.blocks) {
    for (std::size_t i = 1; i < block.size(); ++i) {
      adj[static_cast<std::size_t>(block[0])].push_back(block[i]);
      adj[static_cast<std::size_t>(block[i])].push_back(block[0]);
    }
  }

  std::vector<int32_t> root_of(static_cast<std::size_t>(n), -1);
  std::deque<int> queue;
  for (int s = 0; s < n; ++s) {
    if (root_of[static_cast<std::size_t>(s)] >= 0) continue;
    root_of[static_cast<std::size_t>(s)] = s;
    queue.push_back(s);
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int w : adj[static_cast<std::size_t>(v)]) {
        if (root_of[static_cast<std::size_t>(w)] >= 0) continue;
        root_of[static_cast<std::size_t>(w)] = s;
        queue.push_back(w);
      }
    }
  }
  return finish_labeling(region, bc, root_of);
}

bool is_connected(const ClusterLabeling& labeling, const std::vector<int>& a,
                  const std::vector<int>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("is_connected: empty vertex set");
  for (int x : a)
    for (int y : b)
      if (labeling.same(x, y)) return true;
  return false;
}

std::vector<int> crossing_clusters(const Region& region, const ClusterLabeling& labeling,
                                   const AnnulusSpec& annulus, const Coords& center) {
  if (annulus.inner < 0 || annulus.inner >= annulus.outer)
    throw std::invalid_argument("crossing_clusters: need 0 <= inner < outer");
  std::vector<char> on_inner(labeling.comp.size(), 0);
  for (int v : region.shell_vertices(center, annulus.inner))
    on_inner[static_cast<std::size_t>(labeling.comp[static_cast<std::size_t>(v)])] = 1;
  std::vector<int> ids;
  std::vector<char> seen(labeling.comp.size(), 0);
  for (int v : region.shell_vertices(center, annulus.outer)) {
    int c = labeling.comp[static_cast<std::size_t>(v)];
    if (on_inner[static_cast<std::size_t>(c)] && !seen[static_cast<std::size_t>(c)]) {
      seen[static_cast<std::size_t>(c)] = 1;
      ids.push_back(c);
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

BoundaryClusters boundary_clusters(const Region& region, const ClusterLabeling& labeling,
                                   long mid, const std::vector<long>& radii,
                                   const Coords& center) {
  BoundaryClusters out;
  std::vector<char> on_mid(labeling.comp.size(), 0);
  for (int v : region.shell_vertices(center, mid)) {
    int c = labeling.comp[static_cast<std::size_t>(v)];
    if (!on_mid[static_cast<std::size_t>(c)]) {
      on_mid[static_cast<std::size_t>(c)] = 1;
      out.ids.push_back(c);
    }
  }
  std::sort(out.ids.begin(), out.ids.end());
  for (long r : radii) {
    std::vector<char> hit(labeling.comp.size(), 0);
    for (int v : region.box_vertices(center, r))
      hit[static_cast<std::size_t>(labeling.comp[static_cast<std::size_t>(v)])] = 1;
    std::vector<int> sub;
    for (int c : out.ids)
      if (hit[static_cast<std::size_t>(c)]) sub.push_back(c);
    out.per_radius.push_back(std::move(sub));
  }
  return out;
}

bool sets_connected(const Region& region, const BondConfig& omega,
                    const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty() || b.empty()) return false;
  UnionFind uf;
  uf.reset(region.n_combined());
  const auto& edges = region.edges();
  for (int e = 0; e < region.n_edges(); ++e)
    if (omega.get(e)) uf.unite(edges[static_cast<std::size_t>(e)].a, edges[static_cast<std::size_t>(e)].b);
  for (std::size_t i = 1; i < a.size(); ++i) uf.unite(a[0], a[i]);
  for (std::size_t i = 1; i < b.size(); ++i) uf.unite(b[0], b[i]);
  return uf.connected(a[0], b[0]);
}

}  // namespace fklab
