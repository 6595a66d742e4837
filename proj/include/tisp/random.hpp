#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace tisp {

/*
 * Counter-based generator. Word k of stream (seed, id) is
 *
 *     key  = mix(seed ^ mix(id + 0x632BE59BD9B4E019))
 *     x_k  = mix(key + (k + 1) * 0x9E3779B97F4A7C15)
 *
 * where mix is the SplitMix64 finalizer. Uniforms use the top 53 bits,
 * (x >> 11) + 0.5 scaled by 2^-53, so they lie strictly inside (0, 1).
 * Normals use Box-Muller on two consecutive uniforms (u1, u2), returning
 * sqrt(-2 ln u1) cos(2 pi u2) first and the matching sin term next.
 * Streams are split by id; distinct ids give independent streams.
 */
class CounterRng
{
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), key_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ULL)))
    {}

    // Independent child stream; does not advance this generator.
    CounterRng split(std::uint64_t stream) const
    {
        return CounterRng(key_, stream);
    }

    std::uint64_t next_u64()
    {
        ++counter_;
        return mix(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    double uniform()
    {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle);
    }

    std::uint64_t seed() const { return seed_; }

private:
    static std::uint64_t mix(std::uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace tisp
