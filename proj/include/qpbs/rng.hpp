// Seeded randomness. All library-level draws go through these helpers so a
// given seed reproduces the same run bit for bit.
#pragma once

#include <cstdint>
#include <random>

namespace qpbs {

using Rng = std::mt19937_64;

// Uniform double in [0, 1) built directly from the top 53 bits of one draw;
// avoids std::uniform_real_distribution, whose output is
// implementation-defined.
inline double random_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int random_bit(Rng& rng) { return static_cast<int>(rng() & 1); }

// splitmix64 finalizer; used to derive independent per-trial streams from
// (seed, index) without correlated low bits.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace qpbs
