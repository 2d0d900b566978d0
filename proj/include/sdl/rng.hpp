// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_RNG_HPP
#define SDL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>

namespace sdl {

// All randomness in this library flows through the generators below so that
// every result is a pure function of (master_seed, stream labels). Nothing
// depends on std::random_device, the standard distributions, or scheduling.

/// SplitMix64 step; used for seeding and as a mixing function.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// FNV-1a 64-bit string hash; stable across platforms. Sub-seeds are derived
/// as mix(master_seed, fnv1a64(label)) with mix below, so any implementation
/// can reproduce the streams from the documented labels.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (0x9e3779b97f4a7c15ull + (stream << 1));
    splitmix64(s);
    std::uint64_t t = s ^ stream;
    return splitmix64(t);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    return mix_seed(master, fnv1a64(label));
}

/// xoshiro256++ (Blackman & Vigna), seeded through SplitMix64 as recommended
/// by its authors. Deterministic, portable, cheap.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
        have_cached_ = false;
    }

    Rng(std::uint64_t master, std::uint64_t stream) : Rng(mix_seed(master, stream)) {}

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in (0, 1]: (x >> 11 + 1) * 2^-53. Never 0, so it is safe
    /// inside a logarithm.
    double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (the exact scheme is part of the
    /// determinism contract; no rejection, pairs cached).
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace sdl

#endif
