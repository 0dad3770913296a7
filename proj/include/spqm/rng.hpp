#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace spqm {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of substream `index` under master seed `seed`: h(seed, index).
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// \brief Per-path generator: one independent, reproducible stream per (seed, index).
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t index) : engine_(substream_seed(seed, index)) {}

    double normal() { return normal_(engine_); }

    /// dw = (dW^q + i dW^p)/√2 with dW^q, dW^p ~ N(0, dt); ⟨|dw|²⟩ = dt.
    std::complex<double> wiener_increment(double dt) {
        const double s = std::sqrt(0.5 * dt);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace spqm
