#pragma once

#include <cstdint>
#include <random>

namespace fiberlink::rng {

/// Independent generator for task `stream` of a run seeded with `seed`.
/// Depends only on (seed, stream), so parallel schedules do not change results.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

/// Seed for a named stage of a run (SplitMix64 finalizer of seed and stage).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stage) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stage + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t poisson(std::mt19937_64& gen, double mean) {
  if (!(mean > 0.0)) return 0;
  return std::poisson_distribution<std::uint64_t>(mean)(gen);
}

}  // namespace fiberlink::rng
