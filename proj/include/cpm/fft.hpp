// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace cpm {

/// In-place radix-2 transform, unscaled. Size must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || !std::has_single_bit(n)) {
        throw std::invalid_argument("fft size must be a nonzero power of two");
    }
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sgn = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sgn * 2.0 * std::numbers::pi / static_cast<double>(len);
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto w = std::polar(1.0, ang * static_cast<double>(k));
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

/// Unitary DFT (scale 1/sqrt(N) both directions), out of place.
inline std::vector<std::complex<double>> fft_unitary(
    std::span<const std::complex<double>> x, bool inverse) {
    std::vector<std::complex<double>> a(x.begin(), x.end());
    fft_radix2(a, inverse);
    const double scale = 1.0 / std::sqrt(static_cast<double>(a.size()));
    for (auto& v : a) v *= scale;
    return a;
}

}  // namespace cpm
