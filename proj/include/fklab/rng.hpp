#pragma once

#include <cstdint>

namespace fklab {

// Counter-based generator: the n-th output is a pure function of (key, n),
// so a stream can be reproduced from its key alone, independent of thread
// scheduling.  The key is derived from (seed, stream, purpose); distinct
// purposes (chain updates, sprinkling, ...) get decorrelated streams even
// when they share a seed.  Core mixer is splitmix64.
struct RngStream {
  std::uint64_t state = 0;

  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Two mixing rounds so that nearby (seed, stream, purpose) triples do not
  // produce nearby keys.
  static RngStream keyed(std::uint64_t seed, std::uint64_t stream, std::uint64_t purpose) {
    std::uint64_t k = mix(seed + kGamma * (stream + 1));
    k = mix(k + kGamma * (purpose + 1));
    return RngStream{k};
  }

  std::uint64_t next_u64() {
    state += kGamma;
    return mix(state);
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n), n >= 1.  Rejection-free modulo bias is
  // negligible for the small n used here, but we reject anyway to keep the
  // draw exact.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~0ull - (~0ull % n);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }
};

// Stream purposes.  Keep the numeric values stable: they are part of the
// reproducibility contract (seed + config -> identical output).
enum : std::uint64_t {
  kPurposeChain = 1,     // bond/spin updates of a Markov chain
  kPurposeSprinkle = 2,  // independent Bernoulli sprinkling field
  kPurposeCoupling = 3,  // shared uniforms of the sequential coupling
  kPurposeInit = 4,      // randomized initial states (when requested)
  kPurposeTest = 5,      // scratch streams inside tests
};

}  // namespace fklab
