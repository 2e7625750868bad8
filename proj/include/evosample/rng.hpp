#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "evosample/error.hpp"

namespace evosample {

// Single sequential random stream. mt19937_64's output sequence is pinned by
// the C++ standard; every derived draw below is implemented here instead of
// going through std::*_distribution (whose results are implementation
// defined), so identical seeds give identical results on any toolchain.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

// Unbiased integer in [0, n). Rejection sampling on the raw 64-bit output.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    if (n == 0) throw InvariantError("uniform_index: empty range");
    const std::uint64_t span = n;
    const std::uint64_t threshold = (0 - span) % span;  // 2^64 mod span
    std::uint64_t v = rng();
    while (v < threshold) v = rng();
    return static_cast<std::size_t>(v % span);
}

// Uniform double in [0, 1) with 53-bit resolution.
inline double uniform_real(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal deviate, Box-Muller. Consumes exactly two draws.
inline double normal(Rng& rng) {
    double u1 = uniform_real(rng);
    const double u2 = uniform_real(rng);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::size_t j = uniform_index(rng, i);
        std::swap(values[i - 1], values[j]);
    }
}

// k distinct values from {0, ..., n-1}, returned ascending.
inline std::vector<int> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k) {
    if (k > n) throw InvariantError("sample_without_replacement: k > n");
    std::vector<int> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = static_cast<int>(i);
    // Partial Fisher-Yates: after i steps the first i slots hold the sample.
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + uniform_index(rng, n - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

// Nearest integer, halves rounding up. Used for every count derived from a
// fraction so that reported sizes are reproducible.
inline long round_half_up(double x) {
    return static_cast<long>(std::floor(x + 0.5));
}

}  // namespace evosample
