#pragma once

#include <cstdint>
#include <random>

namespace sieve {

// splitmix64 step; advances `state` and returns the next output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace detail {
inline std::uint64_t mix_label(std::uint64_t key, std::uint64_t label) {
    key ^= label + 0x9e3779b97f4a7c15ULL + (key << 6) + (key >> 2);
    return splitmix64(key);
}
}  // namespace detail

// Derives a substream key from a seed and a list of stream labels
// (e.g. seed, stream id, replicate index). Any consumer that needs
// schedule-independent randomness keys its generator this way.
template <class... Labels>
std::uint64_t substream_key(std::uint64_t seed, Labels... labels) {
    std::uint64_t key = seed;
    ((key = detail::mix_label(key, static_cast<std::uint64_t>(labels))), ...);
    return splitmix64(key);
}

inline std::mt19937_64 make_rng(std::uint64_t key) { return std::mt19937_64(key); }

// Uniform double in [0, 1), 53 random bits. Hand-rolled so that streams are
// identical across standard library implementations.
inline double next_unit(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double next_uniform(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * next_unit(g);
}

// Uniform integer in [0, n) via Lemire's multiply-shift rejection.
inline std::uint64_t next_below(std::mt19937_64& g, std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(g()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (lo < threshold) {
            m = static_cast<unsigned __int128>(g()) * n;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

// Standard normal via Box-Muller; consumes two draws per value.
inline double next_normal(std::mt19937_64& g) {
    const double u1 = static_cast<double>((g() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = next_unit(g);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace sieve
