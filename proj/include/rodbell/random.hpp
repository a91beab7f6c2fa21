#pragma once

#include <cstdint>
#include <random>

namespace rodbell {

/// splitmix64 output function (Steele, Lea & Flood).
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of stream `index` under `master`.
///
/// stream_seed(m, i) = splitmix64(splitmix64(m) ^ splitmix64(i + 0x632BE59BD9B4E019)).
/// Streams for different indices are decorrelated and appending new indices
/// never changes the seed of an existing one.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

}  // namespace rodbell
