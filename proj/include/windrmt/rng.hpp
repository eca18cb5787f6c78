// SPDX-License-Identifier: MIT
//
// rng.hpp: counter-based random number generation (Philox-4x32-10).
//
// Reproducibility contract: the value produced for a given
// (seed, stream_index, draw_index) triple is a pure function of that triple,
// independent of thread count, evaluation order, or how many other streams
// exist.  Monte Carlo drivers give every trial its own stream_index, so
// results are bitwise identical no matter how trials are scheduled.
//
// Philox-4x32-10 reference: Salmon, Moraes, Dror, Shaw, "Parallel random
// numbers: as easy as 1, 2, 3" (SC'11).  Round constants below are the
// published ones; known-answer vectors are pinned in the test suite.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

#include "windrmt/numerics.hpp"

namespace windrmt {

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& x, std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * x[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * x[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
}

/// One Philox-4x32-10 block: counter + key -> 128 random bits.
[[nodiscard]] inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                                std::uint32_t key0,
                                                                std::uint32_t key1) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key0 += kPhiloxW0;
            key1 += kPhiloxW1;
        }
        philox_round(ctr, key0, key1);
    }
    return ctr;
}

}  // namespace detail

/// A reproducible random stream addressed by (seed, stream_index).  Each call
/// to u01() consumes exactly one counter value (draw_index), so any draw can
/// be reproduced in isolation.
struct RandomStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_index = 0;
    std::uint64_t draw_index = 0;

    RandomStream() = default;
    RandomStream(std::uint64_t seed_, std::uint64_t stream_) : seed(seed_), stream_index(stream_) {}

    /// The stream used by Monte Carlo trial `k` under a base configuration.
    [[nodiscard]] static RandomStream for_trial(std::uint64_t seed, std::uint64_t trial) {
        return RandomStream{seed, trial};
    }

    /// Uniform double in the open interval (0, 1); one counter tick.
    double u01() {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(draw_index), static_cast<std::uint32_t>(draw_index >> 32),
            static_cast<std::uint32_t>(stream_index),
            static_cast<std::uint32_t>(stream_index >> 32)};
        ++draw_index;
        const auto out = detail::philox4x32_10(ctr, static_cast<std::uint32_t>(seed),
                                               static_cast<std::uint32_t>(seed >> 32));
        const std::uint64_t bits =
            (static_cast<std::uint64_t>(out[1]) << 32) | static_cast<std::uint64_t>(out[0]);
        // 53 significant bits, centered so 0 and 1 are never returned.
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform double in (lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    /// Standard real normal N(0, 1) via Box-Muller; consumes two ticks.
    double normal() {
        const double u1 = u01();
        const double u2 = u01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

    /// Standard complex normal: E z = 0, E |z|^2 = 1 (real and imaginary
    /// parts are independent N(0, 1/2)).  Consumes two ticks.
    std::complex<double> complex_normal() {
        const double u1 = u01();
        const double u2 = u01();
        return std::polar(std::sqrt(-std::log(u1)), kTwoPi * u2);
    }
};

}  // namespace windrmt
