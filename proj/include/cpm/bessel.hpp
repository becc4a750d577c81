// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace cpm {

/// Bessel function of the first kind, order zero. Absolute error below
/// 1e-10 on |x| <= 50 (ascending series for small arguments, Hankel
/// asymptotic expansion beyond).
double bessel_j0(double x) noexcept;

}  // namespace cpm
