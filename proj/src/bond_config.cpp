#include "fklab/bond_config.hpp"

#include <bit>
#include <stdexcept>

namespace fklab {

BondConfig::BondConfig(int n_edges, bool all_open) : n_edges_(n_edges) {
  if (n_edges < 0) throw std::invalid_argument("BondConfig: negative edge count");
  words_.assign((static_cast<std::size_t>(n_edges) + 63) / 64, 0);
  if (all_open) fill(true);
}

void BondConfig::fill(bool open) {
  if (!open) {
    for (auto& w : words_) w = 0;
    return;
  }
  for (auto& w : words_) w = ~0ull;
  int tail = n_edges_ & 63;
  if (tail != 0 && !words_.empty()) words_.back() &= (1ull << tail) - 1;
}

BondConfig BondConfig::from_bits(int n_edges, std::uint64_t bits) {
  if (n_edges > 64) throw std::invalid_argument("from_bits: too many edges for one word");
  BondConfig cfg(n_edges);
  if (n_edges < 64 && (bits >> n_edges) != 0)
    throw std::invalid_argument("from_bits: bits beyond edge count");
  if (!cfg.words_.empty()) cfg.words_[0] = bits;
  return cfg;
}

int BondConfig::count_open() const {
  int n = 0;
  for (auto w : words_) n += std::popcount(w);
  return n;
}

BondConfig& BondConfig::operator|=(const BondConfig& o) {
  if (o.n_edges_ != n_edges_) throw std::invalid_argument("BondConfig size mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
  return *this;
}

BondConfig& BondConfig::operator&=(const BondConfig& o) {
  if (o.n_edges_ != n_edges_) throw std::invalid_argument("BondConfig size mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
  return *this;
}

BondConfig& BondConfig::subtract(const BondConfig& o) {
  if (o.n_edges_ != n_edges_) throw std::invalid_argument("BondConfig size mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
  return *this;
}

std::string BondConfig::to_hex() const {
  static const char digits[] = "0123456789abcdef";
  int n_bytes = (n_edges_ + 7) / 8;
  std::string out;
  out.reserve(static_cast<std::size_t>(n_bytes) * 2);
  for (int b = 0; b < n_bytes; ++b) {
    unsigned byte = static_cast<unsigned>(
        (words_[static_cast<std::size_t>(b) >> 3] >> ((static_cast<std::size_t>(b) & 7) * 8)) & 0xff);
    out.push_back(digits[byte >> 4]);
    out.push_back(digits[byte & 0xf]);
  }
  return out;
}

BondConfig BondConfig::from_hex(int n_edges, const std::string& hex) {
  int n_bytes = (n_edges + 7) / 8;
  if (static_cast<int>(hex.size()) != n_bytes * 2)
    throw std::invalid_argument("BondConfig::from_hex: length mismatch");
  auto nibble = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
    throw std::invalid_argument("BondConfig::from_hex: bad digit");
  };
  BondConfig cfg(n_edges);
  for (int b = 0; b < n_bytes; ++b) {
    unsigned byte = (nibble(hex[static_cast<std::size_t>(b) * 2]) << 4) |
                    nibble(hex[static_cast<std::size_t>(b) * 2 + 1]);
    cfg.words_[static_cast<std::size_t>(b) >> 3] |=
        static_cast<std::uint64_t>(byte) << ((static_cast<std::size_t>(b) & 7) * 8);
  }
  int tail = n_edges & 63;
  if (tail != 0 && !cfg.words_.empty() && (cfg.words_.back() >> tail) != 0)
    throw std::invalid_argument("BondConfig::from_hex: pad bits set");
  return cfg;
}

BondConfig box_edge_mask(const Region& region, const Coords& center, long r) {
  BondConfig mask(region.n_edges());
  const auto& edges = region.edges();
  for (int e = 0; e < region.n_edges(); ++e) {
    int a = edges[static_cast<std::size_t>(e)].a;
    int b = edges[static_cast<std::size_t>(e)].b;
    if (region.is_ghost(a) || region.is_ghost(b)) continue;
    bool inside = true;
    const Coords& xa = region.site_of(a);
    const Coords& xb = region.site_of(b);
    for (int i = 0; i < region.d(); ++i) {
      long da = std::labs(static_cast<long>(xa[static_cast<std::size_t>(i)]) - center[static_cast<std::size_t>(i)]);
      long db = std::labs(static_cast<long>(xb[static_cast<std::size_t>(i)]) - center[static_cast<std::size_t>(i)]);
      if (da > r || db > r) {
        inside = false;
        break;
      }
    }
    if (inside) mask.set(e, true);
  }
  return mask;
}

BoundarySpec BoundarySpec::wired(const Region& region) {
  BoundarySpec bc;
  if (region.n_ghosts() > 0) {
    std::vector<int> block;
    block.reserve(static_cast<std::size_t>(region.n_ghosts()));
    for (int g = 0; g < region.n_ghosts(); ++g) block.push_back(region.n_vertices() + g);
    bc.blocks.push_back(std::move(block));
  } else if (region.n_vertices() > 0) {
    // No ghosts: wire every vertex of the region itself.
    std::vector<int> block(static_cast<std::size_t>(region.n_vertices()));
    for (int v = 0; v < region.n_vertices(); ++v) block[static_cast<std::size_t>(v)] = v;
    bc.blocks.push_back(std::move(block));
  }
  return bc;
}

void BoundarySpec::validate(const Region& region) const {
  std::vector<char> seen(static_cast<std::size_t>(region.n_combined()), 0);
  for (const auto& block : blocks) {
    if (block.empty()) throw std::invalid_argument("boundary block is empty");
    for (int id : block) {
      if (id < 0 || id >= region.n_combined())
        throw std::invalid_argument("boundary block id out of range");
      if (seen[static_cast<std::size_t>(id)])
        throw std::invalid_argument("boundary blocks are not disjoint");
      seen[static_cast<std::size_t>(id)] = 1;
    }
  }
  for (const auto& [e, m] : intensity) {
    if (e < 0 || e >= region.n_edges())
      throw std::invalid_argument("intensity edge id out of range");
    if (!(m >= 0.0 && m <= 1.0))
      throw std::invalid_argument("intensity multiplier outside [0,1]");
  }
}

std::vector<double> BoundarySpec::edge_probabilities(const Region& region, double p) const {
  std::vector<double> pe(static_cast<std::size_t>(region.n_edges()), p);
  for (const auto& [e, m] : intensity) pe[static_cast<std::size_t>(e)] = m * p;
  return pe;
}

}  // namespace fklab
