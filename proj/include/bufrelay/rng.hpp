#pragma once

#include <cmath>
#include <cstdint>

namespace bufrelay {

/// Seedable xoshiro256++ stream. Samplers own their stream exclusively; a
/// fixed seed reproduces the exact draw sequence on any platform, which the
/// simulator promises as a contract.
///
/// Independent streams for parallel replications come from `child(i)`: the
/// master seed and the child index are mixed through splitmix64, so children
/// of one master never share state.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) w = splitmix(x);
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Exponential with the given mean.
    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

    /// Independent stream derived from this stream's master seed.
    Rng child(std::uint64_t index) const {
        std::uint64_t x = seed_;
        std::uint64_t a = splitmix(x);
        x = index + 0x9e3779b97f4a7c15ULL;
        return Rng(a ^ splitmix(x));
    }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    static std::uint64_t splitmix(std::uint64_t& state) {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t s_[4];
};

} // namespace bufrelay
