#pragma once

#include <cstdint>
#include <random>

namespace arlab {

// mt19937_64 output is fixed by the standard, so streams are reproducible
// across toolchains.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic sub-seed for a tuple of identifiers (master seed, cell, replication, ...).
template <typename... Ids>
std::uint64_t derive_seed(std::uint64_t master, Ids... ids) {
  std::uint64_t h = splitmix64(master);
  ((h = splitmix64(h ^ static_cast<std::uint64_t>(ids))), ...);
  return h;
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Independent generators for the separate random ingredients of one
/// replication. Keeping the mixture selector apart from the innovation
/// variates makes a collapsed mixture (H = G0) reproduce the pure-G0 path.
struct RngStreams {
  Rng innovations;
  Rng selector;
  Rng contamination;

  static RngStreams from_seed(std::uint64_t seed) {
    return RngStreams{Rng(derive_seed(seed, 1)), Rng(derive_seed(seed, 2)),
                      Rng(derive_seed(seed, 3))};
  }
};

}  // namespace arlab
