#pragma once

#include <cstdint>

namespace echoprop {

// All randomness in the library is derived by hashing (seed, stream, counter)
// tuples with a SplitMix64-style mixer. Draws are pure functions of their
// keys, so samplers are reproducible and independent of evaluation order or
// worker count.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ mix64(b));
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix64(mix64(a, b) ^ mix64(c));
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    return mix64(mix64(a, b, c) ^ mix64(d));
}

// Uniform double in [0, 1) from the top 53 bits.
inline double u01(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double uniform_in(std::uint64_t h, double lo, double hi) {
    return lo + (hi - lo) * u01(h);
}

// Stream tags keep unrelated consumers of the same seed decorrelated.
namespace stream {
constexpr std::uint64_t window = 0x01;
constexpr std::uint64_t state_sample = 0x02;
constexpr std::uint64_t pair_draw = 0x03;
constexpr std::uint64_t reachable = 0x04;
constexpr std::uint64_t perturbation = 0x05;
constexpr std::uint64_t observed_anchor = 0x06;
constexpr std::uint64_t system_build = 0x07;
constexpr std::uint64_t diameter = 0x08;
} // namespace stream

} // namespace echoprop
