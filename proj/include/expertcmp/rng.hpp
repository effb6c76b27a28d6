#pragma once

#include <cstdint>
#include <random>

namespace expertcmp {

/// SplitMix64 finalizer (Steele, Lea & Flood). Used to derive independent
/// per-trial seeds from a master seed by counter, so a trial's stream does
/// not depend on which worker runs it.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(trial_index + 0x632BE59BD9B4E019ULL));
}

using Engine = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform,
/// unlike std::uniform_real_distribution.
inline double uniform01(Engine& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(Engine& rng, double p) { return uniform01(rng) < p; }

}  // namespace expertcmp
