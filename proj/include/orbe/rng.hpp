#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace orbe {

/**
 * Deterministic draw helpers on top of std::mt19937_64.
 *
 * The standard distributions (std::uniform_int_distribution and friends)
 * are implementation-defined, so two standard libraries can emit different
 * streams from the same engine state.  Generators and samplers in this
 * project promise byte-identical output for a given seed across platforms,
 * hence these fixed algorithms.
 */

/// Uniform integer in [0, n) by rejection sampling (no modulo bias).
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t m = max % n;
    if (m == n - 1) return rng() % n;  // n divides 2^64: every draw is unbiased
    // Otherwise reject draws from the incomplete final bucket [2^64 - (2^64 mod n), 2^64).
    const std::uint64_t limit = max - m - 1;
    for (;;) {
        const std::uint64_t r = rng();
        if (r <= limit) return r % n;
    }
}

/// Uniform double in [0, 1) with 53 random bits.
inline double unit_real(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Bernoulli coin: true with probability prob.  prob=0 is never true and
/// prob=1 is always true (unit_real is strictly below 1).
inline bool coin(std::mt19937_64& rng, double prob) {
    return unit_real(rng) < prob;
}

}  // namespace orbe
