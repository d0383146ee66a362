#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace buyerlearn {

/**
 * SplitMix64 (Steele, Lea & Flood). A 64-bit state, one add and a mixing
 * function per draw. `split()` derives an independent stream so that every
 * consumer of randomness in an experiment can be seeded from one number.
 *
 * Distributions are implemented here rather than taken from <random> because
 * the standard distributions are not specified bit-for-bit across library
 * implementations.
 */
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    SplitMix64 split() noexcept { return SplitMix64(next() ^ 0x6a09e667f3bcc909ULL); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (one value per call).
    double normal() noexcept {
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::uint64_t state_;
};

} // namespace buyerlearn
