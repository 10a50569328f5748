#pragma once

#include <cstdint>
#include <random>

namespace punnet {

using Rng = std::mt19937_64;

inline Rng seeded_rng(std::uint64_t seed) { return Rng{seed}; }

// Uniform double in [0,1). Drawn directly from the engine's bits instead of
// std::uniform_real_distribution, whose output is implementation-defined;
// this keeps runs reproducible across standard libraries.
inline double unit_uniform(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * unit_uniform(rng);
}

}  // namespace punnet
