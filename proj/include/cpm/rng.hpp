// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace cpm {

/// Labels for the independent random streams derived from one scenario seed.
/// Calibration and evaluation share the channel streams (same propagation
/// environment) but never share noise or payload streams.
enum class Stream : std::uint64_t {
    bob_channel = 1,
    eve_channel = 2,
    calibration_noise = 3,
    calibration_payload = 4,
    evaluation_noise = 5,
    evaluation_payload = 6,
};

/// splitmix64-style mix of (base seed, stream id) into a new seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, Stream stream) noexcept {
    return derive_seed(base, static_cast<std::uint64_t>(stream));
}

/// Deterministic random source. Gaussian draws use Box-Muller on top of
/// mt19937_64 so sequences are reproducible independent of the standard
/// library's distribution internals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform on (0, 1].
    double uniform() {
        return 1.0 - (static_cast<double>(gen_() >> 11) * 0x1.0p-53);
    }

    /// Standard normal N(0, 1).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// Circularly symmetric complex Gaussian with total variance `variance`
    /// (each real component carries variance/2).
    std::complex<double> cnormal(double variance) {
        const double s = std::sqrt(variance / 2.0);
        return {s * normal(), s * normal()};
    }

    /// One equiprobable bit.
    std::uint8_t bit() {
        if (bit_count_ == 0) {
            bit_word_ = gen_();
            bit_count_ = 64;
        }
        const std::uint8_t b = static_cast<std::uint8_t>(bit_word_ & 1u);
        bit_word_ >>= 1;
        --bit_count_;
        return b;
    }

    std::vector<std::uint8_t> bits(std::size_t n) {
        std::vector<std::uint8_t> out(n);
        for (auto& b : out) b = bit();
        return out;
    }

    std::uint64_t word() { return gen_(); }

  private:
    std::mt19937_64 gen_;
    std::uint64_t bit_word_ = 0;
    int bit_count_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace cpm
