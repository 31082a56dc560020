#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace rollcast {

/// Mixes (seed, stream) into an independent substream seed.
/// SplitMix64 finalizer applied to the pair; cheap and well distributed.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seeded random source used by all samplers. Wraps mt19937_64 with the
/// handful of distributions the forecasters need.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
    }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }

    double normal(double mean = 0.0, double std = 1.0) {
        return std::normal_distribution<double>(mean, std)(gen_);
    }

    /// Negative binomial with mean mu and dispersion alpha
    /// (variance mu + alpha*mu^2), drawn as a gamma-Poisson mixture.
    double negative_binomial(double mu, double alpha) {
        if (mu <= 0.0) return 0.0;
        double r = 1.0 / alpha;                 // shape
        double lambda = std::gamma_distribution<double>(r, mu / r)(gen_);
        if (!(lambda > 0.0)) return 0.0;
        return static_cast<double>(std::poisson_distribution<long>(lambda)(gen_));
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

} // namespace rollcast
