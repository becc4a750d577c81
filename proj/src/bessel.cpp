// SPDX-License-Identifier: Apache-2.0

#include "cpm/bessel.hpp"

#include <cmath>
#include <numbers>

namespace cpm {

namespace {

// Ascending power series, J0(x) = sum_m (-x^2/4)^m / (m!)^2. Cancellation
// keeps absolute error near 1e-12 up to the x = 16 handover.
double j0_series(double x) noexcept {
    const double q = -0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int m = 1; m < 200; ++m) {
        term *= q / (static_cast<double>(m) * static_cast<double>(m));
        sum += term;
        if (std::abs(term) < 1e-18) break;
    }
    return sum;
}

// Hankel asymptotic expansion,
//   J0(x) = sqrt(2/(pi x)) * (P(x) cos(x - pi/4) - Q(x) sin(x - pi/4)),
// with the (0,m) coefficients built by the recurrence
//   (0,m+1) = -(0,m) * (2m+1)^2 / (4(m+1)).
// Truncated before the semiconvergent terms start growing; at x >= 16 the
// truncation error is far below 1e-12.
double j0_asymptotic(double x) noexcept {
    const double inv2x = 1.0 / (2.0 * x);
    double t = 1.0;  // (0,m) / (2x)^m
    double p = 0.0;
    double q = 0.0;
    double sign = 1.0;
    for (int m = 0; m < 32; ++m) {
        if (m % 2 == 0) {
            p += sign * t;
        } else {
            q += sign * t;
            sign = -sign;
        }
        const double next = t * (-(2.0 * m + 1.0) * (2.0 * m + 1.0) /
                                 (4.0 * (m + 1.0))) * inv2x;
        if (std::abs(next) >= std::abs(t)) break;
        t = next;
        if (std::abs(t) < 1e-19) break;
    }
    const double chi = x - 0.25 * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) *
           (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double bessel_j0(double x) noexcept {
    x = std::abs(x);  // J0 is even
    if (x == 0.0) return 1.0;
    if (x <= 16.0) return j0_series(x);
    return j0_asymptotic(x);
}

}  // namespace cpm
