// SPDX-License-Identifier: Apache-2.0

#include "cpm/ofdm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "cpm/fft.hpp"
#include "cpm/rng.hpp"

namespace cpm {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

/// Minimum normalized half correlation below which no preamble is assumed.
constexpr double kCfoCorrelationFloor = 0.5;

std::vector<std::complex<double>> with_cyclic_prefix(
    const std::vector<std::complex<double>>& symbol, std::size_t cp_len) {
    std::vector<std::complex<double>> out;
    out.reserve(symbol.size() + cp_len);
    out.insert(out.end(), symbol.end() - static_cast<std::ptrdiff_t>(cp_len),
               symbol.end());
    out.insert(out.end(), symbol.begin(), symbol.end());
    return out;
}

std::complex<double> qpsk_point(std::uint8_t b0, std::uint8_t b1) {
    return {(1.0 - 2.0 * b0) * kInvSqrt2, (1.0 - 2.0 * b1) * kInvSqrt2};
}

void qpsk_slice(const std::complex<double>& y, std::uint8_t& b0, std::uint8_t& b1) {
    b0 = y.real() < 0.0 ? 1 : 0;
    b1 = y.imag() < 0.0 ? 1 : 0;
}

}  // namespace

void OfdmNumerology::validate() const {
    if (fft_size < 2 || !std::has_single_bit(fft_size)) {
        throw std::invalid_argument("numerology.fft_size: must be a power of two >= 2");
    }
    if (cp_len >= fft_size) {
        throw std::invalid_argument("numerology.cp_len: must be < fft_size");
    }
    if (data_subcarriers > fft_size) {
        throw std::invalid_argument(
            "numerology.data_subcarriers: must be <= fft_size");
    }
    if (data_subcarriers == 0 || data_subcarriers % 2 != 0 ||
        data_subcarriers / 2 >= fft_size / 2) {
        throw std::invalid_argument(
            "numerology.data_subcarriers: must be even and fit around DC");
    }
    if (!(sample_rate_hz > 0.0)) {
        throw std::invalid_argument("numerology.sample_rate_hz: must be > 0");
    }
    if (data_symbols_per_frame == 0) {
        throw std::invalid_argument("numerology.data_symbols_per_frame: must be >= 1");
    }
    if (!(carrier_freq_hz > 0.0)) {
        throw std::invalid_argument("numerology.carrier_freq_hz: must be > 0");
    }
}

std::vector<std::size_t> OfdmNumerology::data_subcarrier_map() const {
    std::vector<std::size_t> map;
    map.reserve(data_subcarriers);
    const std::size_t half = data_subcarriers / 2;
    for (std::size_t k = 1; k <= half; ++k) map.push_back(k);
    for (std::size_t k = fft_size - half; k < fft_size; ++k) map.push_back(k);
    return map;
}

std::vector<std::complex<double>> OfdmFrame::samples() const {
    std::vector<std::complex<double>> out;
    out.reserve(preamble.size() + data_symbols.size() *
                                      (data_symbols.empty() ? 0 : data_symbols[0].size()));
    out.insert(out.end(), preamble.begin(), preamble.end());
    for (const auto& sym : data_symbols) {
        out.insert(out.end(), sym.begin(), sym.end());
    }
    return out;
}

std::vector<std::complex<double>> sc_preamble_bins(const OfdmNumerology& num,
                                                   std::uint64_t pn_seed) {
    num.validate();
    Rng pn(pn_seed);
    std::vector<std::complex<double>> bins(num.fft_size, 0.0);
    for (std::size_t k = 0; k < num.fft_size; k += 2) {
        // sqrt(2) * unit-magnitude QPSK: {+-1 +- j}
        bins[k] = std::numbers::sqrt2 * qpsk_point(pn.bit(), pn.bit());
    }
    return bins;
}

std::vector<std::complex<double>> gen_sc_preamble(const OfdmNumerology& num,
                                                  std::uint64_t pn_seed) {
    const auto bins = sc_preamble_bins(num, pn_seed);
    const auto symbol = fft_unitary(bins, /*inverse=*/true);
    return with_cyclic_prefix(symbol, num.cp_len);
}

OfdmFrame modulate_frame(const OfdmNumerology& num,
                         std::span<const std::uint8_t> payload_bits,
                         std::uint64_t pn_seed) {
    num.validate();
    const std::size_t capacity = num.payload_bits_per_frame();
    if (payload_bits.size() > capacity) {
        throw std::invalid_argument("payload_bits: longer than frame capacity");
    }
    std::vector<std::uint8_t> bits(payload_bits.begin(), payload_bits.end());
    bits.resize(capacity, 0);  // zero padding

    OfdmFrame frame;
    frame.preamble = gen_sc_preamble(num, pn_seed);
    frame.subcarrier_map = num.data_subcarrier_map();
    frame.data_symbols.reserve(num.data_symbols_per_frame);
    std::size_t pos = 0;
    for (std::size_t s = 0; s < num.data_symbols_per_frame; ++s) {
        std::vector<std::complex<double>> bins(num.fft_size, 0.0);
        for (const std::size_t k : frame.subcarrier_map) {
            bins[k] = qpsk_point(bits[pos], bits[pos + 1]);
            pos += 2;
        }
        frame.data_symbols.push_back(
            with_cyclic_prefix(fft_unitary(bins, /*inverse=*/true), num.cp_len));
    }
    return frame;
}

double sc_timing_metric_at(std::span<const std::complex<double>> rx,
                           std::size_t offset, const OfdmNumerology& num) {
    const std::size_t half = num.fft_size / 2;
    if (offset + 2 * half > rx.size()) {
        throw std::invalid_argument("sc_timing_metric_at: window out of range");
    }
    std::complex<double> corr = 0.0;
    double energy = 0.0;
    for (std::size_t m = 0; m < half; ++m) {
        const auto a = rx[offset + m];
        const auto b = rx[offset + m + half];
        corr += std::conj(a) * b;
        energy += std::norm(a) + std::norm(b);
    }
    const double r = 0.5 * energy;
    if (r <= 0.0) return 0.0;
    return std::norm(corr) / (r * r);
}

std::vector<double> sc_timing_metric(std::span<const std::complex<double>> rx,
                                     const OfdmNumerology& num) {
    num.validate();
    if (rx.size() < num.fft_size + num.cp_len) {
        throw std::invalid_argument("sc_timing_metric: input shorter than one symbol");
    }
    const std::size_t count = rx.size() - num.fft_size + 1;
    std::vector<double> metric(count);
    for (std::size_t d = 0; d < count; ++d) {
        metric[d] = sc_timing_metric_at(rx, d, num);
    }
    return metric;
}

std::optional<double> estimate_cfo(std::span<const std::complex<double>> rx_preamble,
                                   const OfdmNumerology& num) {
    if (rx_preamble.size() != num.fft_size) {
        throw std::invalid_argument("estimate_cfo: input must be one CP-stripped symbol");
    }
    const std::size_t half = num.fft_size / 2;
    std::complex<double> corr = 0.0;
    double energy = 0.0;
    for (std::size_t m = 0; m < half; ++m) {
        corr += std::conj(rx_preamble[m]) * rx_preamble[m + half];
        energy += std::norm(rx_preamble[m]) + std::norm(rx_preamble[m + half]);
    }
    const double floor = 0.5 * energy * kCfoCorrelationFloor;
    if (!(std::abs(corr) > floor) || energy <= 0.0) return std::nullopt;
    const double half_duration = static_cast<double>(half) / num.sample_rate_hz;
    return std::arg(corr) / (2.0 * std::numbers::pi * half_duration);
}

ChannelSnapshot estimate_channel(std::span<const std::complex<double>> rx_preamble,
                                 std::span<const std::complex<double>> known_bins,
                                 const OfdmNumerology& num) {
    if (rx_preamble.size() != num.fft_size) {
        throw std::invalid_argument(
            "estimate_channel: input must be one CP-stripped symbol");
    }
    if (known_bins.size() != num.fft_size) {
        throw std::invalid_argument("estimate_channel: known_bins length mismatch");
    }
    for (std::size_t k = 0; k < num.fft_size; k += 2) {
        if (known_bins[k] == std::complex<double>(0.0, 0.0)) {
            throw std::invalid_argument("estimate_channel: zero even known bin");
        }
    }
    const auto rx_bins = fft_unitary(rx_preamble, /*inverse=*/false);
    ChannelSnapshot snap;
    snap.h.resize(num.fft_size);
    for (std::size_t k = 0; k < num.fft_size; k += 2) {
        snap.h[k] = rx_bins[k] / known_bins[k];
    }
    for (std::size_t k = 1; k < num.fft_size; k += 2) {
        const std::size_t next = (k + 1) % num.fft_size;
        snap.h[k] = 0.5 * (snap.h[k - 1] + snap.h[next]);
    }
    return snap;
}

std::vector<std::uint8_t> demodulate_frame(std::span<const std::complex<double>> rx_frame,
                                           const ChannelSnapshot& snapshot,
                                           const OfdmNumerology& num) {
    num.validate();
    if (rx_frame.size() < num.frame_samples()) {
        throw std::invalid_argument("demodulate_frame: input shorter than one frame");
    }
    if (snapshot.h.size() != num.fft_size) {
        throw std::invalid_argument("demodulate_frame: snapshot length mismatch");
    }
    const auto map = num.data_subcarrier_map();
    std::vector<std::uint8_t> bits;
    bits.reserve(num.payload_bits_per_frame());
    const std::size_t sym_len = num.symbol_samples();
    for (std::size_t s = 0; s < num.data_symbols_per_frame; ++s) {
        const std::size_t start = (1 + s) * sym_len + num.cp_len;
        std::span<const std::complex<double>> symbol =
            rx_frame.subspan(start, num.fft_size);
        const auto bins = fft_unitary(symbol, /*inverse=*/false);
        for (const std::size_t k : map) {
            const auto y = bins[k] / snapshot.h[k];
            std::uint8_t b0 = 0;
            std::uint8_t b1 = 0;
            qpsk_slice(y, b0, b1);
            bits.push_back(b0);
            bits.push_back(b1);
        }
    }
    return bits;
}

std::vector<std::complex<double>> apply_cfo(std::span<const std::complex<double>> x,
                                            double freq_hz, double sample_rate_hz,
                                            std::size_t ref_index) {
    std::vector<std::complex<double>> out(x.size());
    const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double phase =
            w * (static_cast<double>(n) - static_cast<double>(ref_index));
        out[n] = x[n] * std::polar(1.0, phase);
    }
    return out;
}

void write_iq(const std::string& path, std::span<const std::complex<double>> x) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("write_iq: cannot open " + path);
    auto put = [&f](float v) {
        const auto u = std::bit_cast<std::uint32_t>(v);
        const char bytes[4] = {
            static_cast<char>(u & 0xFF), static_cast<char>((u >> 8) & 0xFF),
            static_cast<char>((u >> 16) & 0xFF), static_cast<char>((u >> 24) & 0xFF)};
        f.write(bytes, 4);
    };
    for (const auto& v : x) {
        put(static_cast<float>(v.real()));
        put(static_cast<float>(v.imag()));
    }
    if (!f) throw std::runtime_error("write_iq: write failed for " + path);
}

std::vector<std::complex<double>> read_iq(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_iq: cannot open " + path);
    std::vector<std::complex<double>> out;
    char bytes[8];
    auto decode = [](const char* b) {
        std::uint32_t u = 0;
        for (int i = 3; i >= 0; --i) {
            u = (u << 8) | static_cast<std::uint8_t>(b[i]);
        }
        return static_cast<double>(std::bit_cast<float>(u));
    };
    while (f.read(bytes, 8)) {
        out.emplace_back(decode(bytes), decode(bytes + 4));
    }
    return out;
}

}  // namespace cpm
