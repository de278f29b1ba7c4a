#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "fklab/geometry.hpp"

namespace fklab {

// Open/closed state of every edge of a region, packed 64 per word.  Bit i is
// edge i in the region's canonical edge order.
class BondConfig {
 public:
  BondConfig() = default;
  explicit BondConfig(int n_edges, bool all_open = false);

  int n_edges() const { return n_edges_; }
  bool get(int e) const {
    return (words_[static_cast<std::size_t>(e) >> 6] >> (static_cast<std::size_t>(e) & 63)) & 1u;
  }
  void set(int e, bool open) {
    std::uint64_t bit = 1ull << (static_cast<std::size_t>(e) & 63);
    if (open)
      words_[static_cast<std::size_t>(e) >> 6] |= bit;
    else
      words_[static_cast<std::size_t>(e) >> 6] &= ~bit;
  }
  void fill(bool open);
  int count_open() const;

  // Overwrite the first word; only meaningful when n_edges <= 64.
  void set_bits(std::uint64_t bits) { words_[0] = bits; }
  static BondConfig from_bits(int n_edges, std::uint64_t bits);

  BondConfig& operator|=(const BondConfig& o);
  BondConfig& operator&=(const BondConfig& o);
  // Clear every bit set in o.
  BondConfig& subtract(const BondConfig& o);
  friend BondConfig operator|(BondConfig a, const BondConfig& b) { return a |= b; }
  friend BondConfig operator&(BondConfig a, const BondConfig& b) { return a &= b; }
  bool operator==(const BondConfig& o) const = default;

  const std::vector<std::uint64_t>& words() const { return words_; }

  // Lowercase hex, one byte per two digits, edge i at bit (i % 8) of byte
  // (i / 8); trailing pad bits are zero.
  std::string to_hex() const;
  static BondConfig from_hex(int n_edges, const std::string& hex);

 private:
  int n_edges_ = 0;
  std::vector<std::uint64_t> words_;
};

// Mask of the edges with both endpoints inside box(center, r).
BondConfig box_edge_mask(const Region& region, const Coords& center, long r);

// Boundary condition: a wiring partition plus optional per-edge intensity
// multipliers.  Blocks normally contain ghost ids; region vertices are
// allowed (a micro region with no ghosts realizes "wired" by wiring its
// endpoints directly).
struct BoundarySpec {
  std::vector<std::vector<int>> blocks;
  std::unordered_map<int, double> intensity;  // edge id -> multiplier in [0,1]

  static BoundarySpec free_bc() { return {}; }
  static BoundarySpec wired(const Region& region);
  bool is_free() const { return blocks.empty(); }
  void validate(const Region& region) const;  // disjointness, id range, multipliers

  // p_e = multiplier * p for every edge.
  std::vector<double> edge_probabilities(const Region& region, double p) const;
};

}  // namespace fklab
