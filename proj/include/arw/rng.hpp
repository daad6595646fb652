#pragma once

// Counter-based random numbers. Every random quantity in the library is a
// pure function of a 64-bit key and a counter, so results never depend on
// the order in which values are requested.

#include <cmath>
#include <cstdint>
#include <limits>

namespace arw
{
    inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept
    {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    inline constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept
    {
        return mix64(h ^ mix64(v + 0x632be59bd9b4e019ULL));
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    inline constexpr double to_unit(std::uint64_t bits) noexcept
    {
        return static_cast<double>(bits >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1], safe to pass to log().
    inline constexpr double to_open_unit(std::uint64_t bits) noexcept
    {
        return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Seed for replica `index` of an experiment with master seed `master`.
    inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
    {
        return hash_combine(mix64(master ^ 0x5851f42d4c957f2dULL), index);
    }

    /// Sequential stream over a counter; models UniformRandomBitGenerator.
    class CounterRng
    {
    public:
        using result_type = std::uint64_t;

        explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(mix64(key)) {}

        static constexpr result_type min() noexcept { return 0; }
        static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

        constexpr result_type operator()() noexcept { return hash_combine(key_, counter_++); }

        double uniform() noexcept { return to_unit((*this)()); }
        double open_uniform() noexcept { return to_open_unit((*this)()); }

        double exponential(double rate) noexcept { return -std::log(open_uniform()) / rate; }

        bool bernoulli(double p) noexcept { return uniform() < p; }

        /// Geometric on {1, 2, ...} with success probability p.
        std::uint64_t geometric(double p) noexcept
        {
            if (p >= 1.0)
            {
                return 1;
            }
            const double u = open_uniform();
            return 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-p)));
        }

        /// Uniform integer in [0, n).
        std::uint64_t below(std::uint64_t n) noexcept
        {
            return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
        }

        std::uint64_t counter() const noexcept { return counter_; }

    private:
        std::uint64_t key_;
        std::uint64_t counter_ = 0;
    };

    /// Poisson(mean) by inversion from a single uniform.
    inline std::int32_t poisson_from_uniform(double mean, double u) noexcept
    {
        if (mean <= 0.0)
        {
            return 0;
        }
        double p = std::exp(-mean);
        double cdf = p;
        std::int32_t k = 0;
        while (u >= cdf && k < 100000)
        {
            ++k;
            p *= mean / k;
            cdf += p;
            if (p == 0.0 && cdf < u)
            {
                break;
            }
        }
        return k;
    }
}
