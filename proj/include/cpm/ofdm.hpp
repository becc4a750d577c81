// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cpm {

/// OFDM waveform parameters. Defaults: 64-point FFT, 48 data subcarriers,
/// 16-sample cyclic prefix at 3.125 MSps, one Schmidl-Cox preamble symbol
/// followed by 4 data symbols per frame (400 samples, 128 us).
struct OfdmNumerology {
    std::size_t fft_size = 64;
    std::size_t data_subcarriers = 48;
    std::size_t cp_len = 16;
    double sample_rate_hz = 3.125e6;
    std::size_t data_symbols_per_frame = 4;
    double carrier_freq_hz = 2.45e9;

    void validate() const;  // throws std::invalid_argument naming the field

    std::size_t symbol_samples() const { return fft_size + cp_len; }
    std::size_t frame_samples() const {
        return (1 + data_symbols_per_frame) * symbol_samples();
    }
    double frame_duration_s() const {
        return static_cast<double>(frame_samples()) / sample_rate_hz;
    }
    std::size_t payload_bits_per_frame() const {
        return data_symbols_per_frame * data_subcarriers * 2;  // QPSK
    }
    /// Occupied data bins: +-1..+-(data_subcarriers/2) around DC,
    /// in natural FFT index order (DC and band edges unused).
    std::vector<std::size_t> data_subcarrier_map() const;
};

/// Origin of a packet, carried for evaluation only. The detector never
/// reads it.
enum class Origin { unknown, bob, eve };

/// Per-packet frequency-domain channel estimate (the detector's input).
struct ChannelSnapshot {
    std::vector<std::complex<double>> h;  // length fft_size, all finite
    std::uint64_t timestamp_k = 0;
    Origin source_label = Origin::unknown;
};

/// One transmit frame in time domain.
struct OfdmFrame {
    std::vector<std::complex<double>> preamble;  // cp_len + fft_size samples
    std::vector<std::vector<std::complex<double>>> data_symbols;
    std::vector<std::size_t> subcarrier_map;

    std::vector<std::complex<double>> samples() const;  // concatenated frame
};

/// Frequency-domain Schmidl-Cox preamble allocation: even bins carry
/// unit-magnitude PN QPSK scaled by sqrt(2), odd bins are zero.
std::vector<std::complex<double>> sc_preamble_bins(const OfdmNumerology& num,
                                                   std::uint64_t pn_seed);

/// Time-domain Schmidl-Cox preamble (CP + symbol). The symbol part has unit
/// average power and two identical halves.
std::vector<std::complex<double>> gen_sc_preamble(const OfdmNumerology& num,
                                                  std::uint64_t pn_seed);

/// QPSK-modulate payload bits (padded with zeros up to the frame capacity)
/// onto the data subcarriers. Rejects payloads longer than the capacity.
OfdmFrame modulate_frame(const OfdmNumerology& num,
                         std::span<const std::uint8_t> payload_bits,
                         std::uint64_t pn_seed);

/// Schmidl-Cox timing metric |P(d)|^2 / R(d)^2 per candidate offset, with
/// the symmetric half-window energy normalizer so the metric stays in
/// [0, 1]. Equals 1 at alignment when the two halves match exactly.
std::vector<double> sc_timing_metric(std::span<const std::complex<double>> rx,
                                     const OfdmNumerology& num);

/// Metric at a single candidate offset.
double sc_timing_metric_at(std::span<const std::complex<double>> rx,
                           std::size_t offset, const OfdmNumerology& num);

/// Coarse CFO from the aligned, CP-stripped preamble symbol (length
/// fft_size): f = angle(sum conj(first half) * second half) / (2 pi L / fs).
/// Unambiguous for |f| < fs / fft_size. Returns nothing when the half
/// correlation is too weak to indicate a preamble.
std::optional<double> estimate_cfo(std::span<const std::complex<double>> rx_preamble,
                                   const OfdmNumerology& num);

/// Least-squares channel estimate from the aligned, CFO-corrected preamble
/// symbol: H[k] = Y[k]/X[k] on even bins, odd bins linearly interpolated
/// from the even neighbors (wrapping at the band edges). Throws if any even
/// known bin is zero.
ChannelSnapshot estimate_channel(std::span<const std::complex<double>> rx_preamble,
                                 std::span<const std::complex<double>> known_bins,
                                 const OfdmNumerology& num);

/// Equalize with the snapshot and slice QPSK back to bits (pipeline
/// validation path; the detector itself only consumes snapshots).
std::vector<std::uint8_t> demodulate_frame(std::span<const std::complex<double>> rx_frame,
                                           const ChannelSnapshot& snapshot,
                                           const OfdmNumerology& num);

/// Multiply by a complex exponential of `freq_hz`, phase zero at
/// `ref_index`. Used to inject and to undo carrier frequency offsets.
std::vector<std::complex<double>> apply_cfo(std::span<const std::complex<double>> x,
                                            double freq_hz, double sample_rate_hz,
                                            std::size_t ref_index = 0);

/// Raw IQ dump: interleaved 32-bit float little-endian (I,Q) pairs.
void write_iq(const std::string& path, std::span<const std::complex<double>> x);
std::vector<std::complex<double>> read_iq(const std::string& path);

}  // namespace cpm
