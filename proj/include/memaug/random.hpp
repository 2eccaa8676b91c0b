#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "memaug/errors.hpp"

namespace memaug {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits, so streams are
/// reproducible across standard library implementations.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    if (n == 0) throw UsageError("uniform_index: empty range");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return static_cast<std::size_t>(x % bound);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent generator for a numbered sub-stream of a seed.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
    return Rng(splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 1)));
}

/// Draws an index from a discrete distribution given by `probability(i)` for
/// i in [0, n). The last positive entry absorbs rounding slack.
template <class ProbabilityFn>
std::size_t sample_discrete(std::size_t n, ProbabilityFn&& probability, Rng& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t last_positive = n;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = probability(i);
        if (p <= 0.0) continue;
        last_positive = i;
        acc += p;
        if (u < acc) return i;
    }
    if (last_positive == n) throw UsageError("sample_discrete: distribution has no mass");
    return last_positive;
}

inline std::size_t sample_discrete(std::span<const double> probs, Rng& rng) {
    return sample_discrete(probs.size(), [&](std::size_t i) { return probs[i]; }, rng);
}

} // namespace memaug
