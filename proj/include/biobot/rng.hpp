#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace biobot {

using Rng = std::mt19937_64;

/// splitmix64 finaliser; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream for (seed, stream id).
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) { return Rng(mix64(seed ^ mix64(stream + 1))); }

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double gaussian(Rng& rng, double mean = 0.0, double sd = 1.0)
{
    return sd > 0.0 ? std::normal_distribution<double>(mean, sd)(rng) : mean;
}

/// Lognormal parameterised by its own mean and standard deviation.
inline double lognormal_mean_sd(Rng& rng, double mean, double sd)
{
    if (!(mean > 0.0))
        return 0.0;
    if (!(sd > 0.0))
        return mean;
    const double s2 = std::log1p((sd * sd) / (mean * mean));
    return std::lognormal_distribution<double>(std::log(mean) - 0.5 * s2, std::sqrt(s2))(rng);
}

/// True with probability 1 - exp(-rate*dt), i.e. a Poisson event in the step.
inline bool hazard_fires(Rng& rng, double rate, double dt)
{
    if (!(rate > 0.0))
        return false;
    return uniform01(rng) < -std::expm1(-rate * dt);
}

} // namespace biobot
