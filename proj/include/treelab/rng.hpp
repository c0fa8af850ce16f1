#pragma once

#include <cstdint>
#include <random>

namespace treelab {

using Rng = std::mt19937_64;

// splitmix64 step; used for seed derivation and stateless hashing.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stateless mix of two words (order-sensitive).
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  return splitmix64(s);
}

// Substream derivation: stream i of master seed s is seeded with
// splitmix64 applied to s xor a golden-ratio multiple of (i+1).  Two
// distinct stream ids give independent-looking generators and the map is
// pure, so any worker can recreate its stream from (seed, id) alone.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return Rng(mix64(a, b));
}

// Unbiased draw from [0, bound) by rejection; bound must be nonzero.
inline std::uint64_t rand_below(Rng& rng, std::uint64_t bound) {
  std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
  for (;;) {
    std::uint64_t x = rng();
    if (x >= threshold) return x % bound;
  }
}

// Uniform double in [0,1) with 53 random bits.
inline double rand_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool rand_bit(Rng& rng) { return (rng() >> 63) != 0; }

}  // namespace treelab
