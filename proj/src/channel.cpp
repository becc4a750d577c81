// SPDX-License-Identifier: Apache-2.0

#include "cpm/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cpm/bessel.hpp"

namespace cpm {

void SpatialGeometry::validate() const {
    if (!(d_ab_m >= 0.0)) throw std::invalid_argument("geometry.d_ab_m: must be >= 0");
    if (!(d_ae_m >= 0.0)) throw std::invalid_argument("geometry.d_ae_m: must be >= 0");
    if (!(d_be_m >= 0.0)) throw std::invalid_argument("geometry.d_be_m: must be >= 0");
    if (!(carrier_freq_hz > 0.0)) {
        throw std::invalid_argument("geometry.carrier_freq_hz: must be > 0");
    }
}

double spatial_correlation(const SpatialGeometry& geometry) {
    geometry.validate();
    const double x = 2.0 * std::numbers::pi * geometry.d_be_m / geometry.wavelength_m();
    return std::clamp(bessel_j0(x), -1.0, 1.0);
}

std::vector<std::complex<double>> dft_of_taps(
    std::span<const std::complex<double>> taps, std::size_t fft_size) {
    std::vector<std::complex<double>> response(fft_size);
    for (std::size_t k = 0; k < fft_size; ++k) {
        const auto step = std::polar(
            1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                     static_cast<double>(fft_size));
        std::complex<double> phasor = 1.0;
        std::complex<double> acc = 0.0;
        for (const auto& tap : taps) {
            acc += tap * phasor;
            phasor *= step;
        }
        response[k] = acc;
    }
    return response;
}

double pdp_decay_for_floor_db(std::size_t num_taps, double floor_db) {
    if (num_taps < 1) throw std::invalid_argument("num_taps: must be >= 1");
    if (num_taps == 1) return 1.0;
    if (!(floor_db < 0.0)) throw std::invalid_argument("pdp_floor_db: must be < 0");
    return -floor_db * std::numbers::ln10 / 10.0 / static_cast<double>(num_taps - 1);
}

namespace {

std::vector<double> normalized_tap_variances(double pdp_decay, std::size_t num_taps) {
    if (num_taps < 1) throw std::invalid_argument("num_taps: must be >= 1");
    if (!(pdp_decay > 0.0)) throw std::invalid_argument("pdp_decay: must be > 0");
    std::vector<double> v(num_taps);
    double total = 0.0;
    for (std::size_t p = 0; p < num_taps; ++p) {
        v[p] = std::exp(-pdp_decay * static_cast<double>(p));
        total += v[p];
    }
    for (auto& x : v) x /= total;
    return v;
}

}  // namespace

FadingLink::FadingLink(double pdp_decay, std::size_t num_taps, double temporal_rho,
                       std::uint64_t stream_seed, std::size_t fft_size)
    : tap_variances_(normalized_tap_variances(pdp_decay, num_taps)),
      rho_(temporal_rho),
      stream_seed_(stream_seed),
      rng_(stream_seed),
      fft_size_(fft_size) {
    if (!(temporal_rho >= 0.0 && temporal_rho <= 1.0)) {
        throw std::invalid_argument("temporal_rho: must be in [0, 1]");
    }
    state_.taps.resize(num_taps);
    for (std::size_t p = 0; p < num_taps; ++p) {
        state_.taps[p] = rng_.cnormal(tap_variances_[p]);
    }
    refresh_response();
}

void FadingLink::refresh_response() {
    state_.freq_response = dft_of_taps(state_.taps, fft_size_);
}

void FadingLink::set_taps(std::vector<std::complex<double>> taps) {
    if (taps.size() != state_.taps.size()) {
        throw std::invalid_argument("set_taps: tap count mismatch");
    }
    state_.taps = std::move(taps);
    refresh_response();
}

const ChannelRealization& FadingLink::step() {
    const double innov = std::sqrt(1.0 - rho_ * rho_);
    for (std::size_t p = 0; p < state_.taps.size(); ++p) {
        state_.taps[p] = rho_ * state_.taps[p] + innov * rng_.cnormal(tap_variances_[p]);
    }
    refresh_response();
    return state_;
}

std::pair<FadingLink, FadingLink> make_linked_pair(
    const SpatialGeometry& geometry, double pdp_decay, std::size_t num_taps,
    double temporal_rho, std::uint64_t seed, std::size_t fft_size) {
    FadingLink bob(pdp_decay, num_taps, temporal_rho,
                   derive_seed(seed, Stream::bob_channel), fft_size);
    FadingLink eve(pdp_decay, num_taps, temporal_rho,
                   derive_seed(seed, Stream::eve_channel), fft_size);
    const double rho_s = spatial_correlation(geometry);
    const double indep = std::sqrt(1.0 - rho_s * rho_s);
    std::vector<std::complex<double>> taps(num_taps);
    for (std::size_t p = 0; p < num_taps; ++p) {
        taps[p] = rho_s * bob.current().taps[p] + indep * eve.current().taps[p];
    }
    eve.set_taps(std::move(taps));
    return {std::move(bob), std::move(eve)};
}

std::vector<std::complex<double>> apply_channel(
    std::span<const std::complex<double>> samples,
    const ChannelRealization& realization, double snr_db, Rng& noise_rng) {
    if (samples.empty()) throw std::invalid_argument("apply_channel: empty input");
    const auto& taps = realization.taps;
    std::vector<std::complex<double>> out(samples.size());
    for (std::size_t n = 0; n < samples.size(); ++n) {
        std::complex<double> acc = 0.0;
        const std::size_t pmax = std::min(taps.size() - 1, n);
        for (std::size_t p = 0; p <= pmax; ++p) {
            acc += taps[p] * samples[n - p];
        }
        out[n] = acc;
    }
    if (std::isnan(snr_db)) throw std::invalid_argument("snr_db: must not be NaN");
    if (std::isfinite(snr_db)) {
        double power = 0.0;
        for (const auto& y : out) power += std::norm(y);
        power /= static_cast<double>(out.size());
        const double noise_var = power * std::pow(10.0, -snr_db / 10.0);
        for (auto& y : out) y += noise_rng.cnormal(noise_var);
    } else if (snr_db < 0.0) {
        throw std::invalid_argument("snr_db: -infinity is not a valid SNR");
    }
    return out;
}

}  // namespace cpm
