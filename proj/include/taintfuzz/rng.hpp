#pragma once

#include <cstdint>

namespace taintfuzz {

/// Deterministic 64-bit generator (xoshiro256** seeded through splitmix64).
/// The raw stream and all bounded draws are identical across platforms, which
/// every reproducibility guarantee in this project relies on.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& s : state_) {
      // splitmix64 step
      x += 0x9E3779B97F4A7C15ULL;
      uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
      s = z ^ (z >> 31);
    }
  }

  uint64_t next() {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform draw in [0, limit). limit must be nonzero. Uses modulo reduction;
  /// the bias is at most limit/2^64 and invisible to every statistical check
  /// this project performs.
  uint64_t below(uint64_t limit) { return next() % limit; }

  /// Derives an independent stream for worker fan-out.
  static Rng substream(uint64_t seed, uint64_t stream_id) {
    return Rng(seed ^ (0xA0761D6478BD642FULL * (stream_id + 1)));
  }

 private:
  static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  uint64_t state_[4];
};

}  // namespace taintfuzz
