// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cpm/rng.hpp"

namespace cpm {

/// Propagation speed used for wavelength arithmetic (engineering value).
inline constexpr double kPropagationSpeedMps = 3.0e8;

/// Transmitter/receiver layout. Alice receives; Bob and Eve transmit from
/// positions d_ab and d_ae away, separated from each other by d_be.
struct SpatialGeometry {
    double d_ab_m = 3.0;
    double d_ae_m = 3.0;
    double d_be_m = 0.10;
    double carrier_freq_hz = 2.45e9;

    double wavelength_m() const { return kPropagationSpeedMps / carrier_freq_hz; }
    void validate() const;  // throws std::invalid_argument naming the field
};

/// Clarke/Jakes isotropic-scattering correlation between two transmitters
/// separated by d_be: J0(2 pi d / lambda), clamped to [-1, 1].
double spatial_correlation(const SpatialGeometry& geometry);

/// One multipath channel state: P delay taps plus their 64-bin frequency
/// response (M-point DFT of the zero-padded tap vector).
struct ChannelRealization {
    std::vector<std::complex<double>> taps;
    std::vector<std::complex<double>> freq_response;
};

/// Direct M-point DFT of a (short) tap vector, H[k] = sum_p h_p e^{-j2pi kp/M}.
std::vector<std::complex<double>> dft_of_taps(
    std::span<const std::complex<double>> taps, std::size_t fft_size);

/// Exponential power delay profile decay constant that puts the last of
/// `num_taps` taps `floor_db` below the first.
double pdp_decay_for_floor_db(std::size_t num_taps, double floor_db);

/// Rayleigh tapped-delay-line link with first-order Gauss-Markov evolution
/// per tap: h_p(k) = rho h_p(k-1) + sqrt(1-rho^2) w_p, w_p ~ CN(0, sigma_p^2).
/// Expected total tap power is 1. Single-owner mutable state.
class FadingLink {
  public:
    FadingLink(double pdp_decay, std::size_t num_taps, double temporal_rho,
               std::uint64_t stream_seed, std::size_t fft_size = 64);

    /// Advance one packet interval and return the new realization.
    const ChannelRealization& step();

    const ChannelRealization& current() const { return state_; }
    double temporal_rho() const { return rho_; }
    const std::vector<double>& tap_variances() const { return tap_variances_; }
    std::uint64_t stream_seed() const { return stream_seed_; }

    /// Replace the tap state (used to impose spatial correlation on Eve).
    void set_taps(std::vector<std::complex<double>> taps);

  private:
    void refresh_response();

    std::vector<double> tap_variances_;
    double rho_;
    std::uint64_t stream_seed_;
    Rng rng_;
    std::size_t fft_size_;
    ChannelRealization state_;
};

/// Construct Bob's and Eve's links from one seed. Eve's initial taps are
/// correlated with Bob's per tap: h_E = rho_s h_B + sqrt(1-rho_s^2) g with
/// rho_s from spatial_correlation(); both evolve independently afterwards.
std::pair<FadingLink, FadingLink> make_linked_pair(
    const SpatialGeometry& geometry, double pdp_decay, std::size_t num_taps,
    double temporal_rho, std::uint64_t seed, std::size_t fft_size = 64);

/// Linear convolution of samples with the realization's taps plus complex
/// AWGN scaled so the average received SNR over the block equals snr_db.
/// snr_db = +infinity disables the noise.
std::vector<std::complex<double>> apply_channel(
    std::span<const std::complex<double>> samples,
    const ChannelRealization& realization, double snr_db, Rng& noise_rng);

}  // namespace cpm
