#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Deterministic random helpers. std::<distribution> output is
// implementation-defined, so everything that feeds seeded fixtures or
// data generation goes through these instead.
namespace spac::rng {

using Engine = std::mt19937_64;

// splitmix64-style combiner for deriving stream seeds.
inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double uniform01(Engine& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

// Inclusive on both ends.
inline int uniform_int(Engine& g, int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(g() % span);
}

inline double normal(Engine& g) {
    // Box-Muller, cosine branch only (no cached second value, so results
    // do not depend on call pairing).
    double u1 = uniform01(g);
    while (u1 <= 0.0) u1 = uniform01(g);
    const double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

inline int poisson(Engine& g, double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda < 500.0) {
        const double limit = std::exp(-lambda);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01(g);
        } while (p > limit);
        return k - 1;
    }
    const int n = static_cast<int>(std::llround(lambda + std::sqrt(lambda) * normal(g)));
    return n < 0 ? 0 : n;
}

// Fisher-Yates.
template <typename T>
void shuffle(std::vector<T>& v, Engine& g) {
    for (size_t i = v.size(); i > 1; --i) {
        const size_t j = g() % i;
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace spac::rng
