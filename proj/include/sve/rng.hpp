#pragma once

#include <cmath>
#include <cstdint>

namespace sve {

// Counter-based random numbers: every variate is a pure function of
// (seed, stream, counter), so path j / step k is seed-addressable and the
// output is bit-identical regardless of how work is split across threads.

// SplitMix64 finalizer (Stafford mix 13): bijective avalanche mix.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rng_word(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t counter) {
    // Decorrelate the stream from the seed with one mix round, then take a
    // SplitMix64 step at the counter within the stream.
    const std::uint64_t base =
        mix64(seed ^ (0xd1342543de82ef95ULL * stream + 0x2545f4914f6cdd1dULL));
    return mix64(base + 0x9e3779b97f4a7c15ULL * (counter + 1));
}

// Uniform on the open interval (0, 1); never returns 0 or 1.
inline double rng_uniform01(std::uint64_t seed, std::uint64_t stream,
                            std::uint64_t counter) {
    return static_cast<double>(rng_word(seed, stream, counter) >> 11) * 0x1.0p-53 +
           0x1.0p-54;
}

// One standard normal per (stream, index): Box-Muller cosine branch over two
// uniforms at counters (2 index, 2 index + 1).
inline double rng_normal(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t index) {
    const double u1 = rng_uniform01(seed, stream, 2 * index);
    const double u2 = rng_uniform01(seed, stream, 2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace sve
