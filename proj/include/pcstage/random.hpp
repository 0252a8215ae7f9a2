#pragma once

#include <cstdint>
#include <random>

namespace pcstage {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive statistically independent child
/// seeds from a master seed and a stream counter.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(derive_seed(seed, stream)); }

/// Uniform draw on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    double u = 0.0;
    do {
        u = dist(rng);
    } while (u <= 0.0 || u >= 1.0);
    return u;
}

inline double standard_normal(Rng& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

/// Uniform index in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(rng);
}

} // namespace pcstage
