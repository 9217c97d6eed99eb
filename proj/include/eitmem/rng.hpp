// Deterministic random number generation for all stochastic parts of the
// simulator. The standard-library distributions are implementation defined,
// so everything here is hand-rolled to keep seeded runs reproducible.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace eitmem {

/// splitmix64; used for seed expansion and sub-seed derivation.
inline std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derive an independent sub-seed from a master seed and a stream index.
/// This is the seed-splitting rule used by scenarios: one stream per
/// (purpose, frame/point index) pair, so frames can be generated in any
/// order and still reproduce bit-identically.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream)
{
    std::uint64_t s = master ^ (0x517cc1b727220a95ULL * (stream + 1));
    splitmix64(s);
    return splitmix64(s);
}

/// xoshiro256++ generator (Blackman & Vigna).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 1)
    {
        std::uint64_t s = seed;
        for (auto& word : state_)
            word = splitmix64(s);
    }

    std::uint64_t next_u64()
    {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform()
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller (no cached spare; keeps state simple).
    double normal()
    {
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    /// Poisson deviate with the given mean. Inversion by sequential search
    /// below mean 10, Hormann's PTRS transformed rejection above it; both
    /// are exact samplers.
    std::uint64_t poisson(double mean)
    {
        if (!(mean > 0.0))
            return 0;
        if (mean < 10.0)
            return poisson_inversion(mean);
        return poisson_ptrs(mean);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k)
    {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t poisson_inversion(double mean)
    {
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double product = uniform();
        while (product > limit) {
            ++k;
            product *= uniform();
        }
        return k;
    }

    std::uint64_t poisson_ptrs(double mean)
    {
        const double slam = std::sqrt(mean);
        const double loglam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = uniform() - 0.5;
            const double v = uniform();
            const double us = 0.5 - std::abs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= vr)
                return static_cast<std::uint64_t>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us))
                continue;
            if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b)
                <= kf * loglam - mean - std::lgamma(kf + 1.0))
                return static_cast<std::uint64_t>(kf);
        }
    }

    std::array<std::uint64_t, 4> state_{};
};

} // namespace eitmem
