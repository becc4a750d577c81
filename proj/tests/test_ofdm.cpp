// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <vector>

#include "cpm/channel.hpp"
#include "cpm/fft.hpp"
#include "cpm/ofdm.hpp"
#include "cpm/rng.hpp"
#include "oracles.hpp"

using cpm::OfdmNumerology;
using std::complex;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

cpm::ChannelRealization identity_channel() {
    cpm::ChannelRealization c;
    c.taps = {1.0};
    c.freq_response = cpm::dft_of_taps(c.taps, 64);
    return c;
}

cpm::ChannelRealization two_tap_channel() {
    cpm::ChannelRealization c;
    c.taps = {complex<double>(0.9, 0.1), complex<double>(-0.35, 0.2)};
    c.freq_response = cpm::dft_of_taps(c.taps, 64);
    return c;
}

}  // namespace

TEST_SUITE("ofdm") {

TEST_CASE("numerology: frame spans 400 samples and exactly 128 us") {
    const OfdmNumerology num;
    num.validate();
    CHECK(num.frame_samples() == 400);
    CHECK(num.symbol_samples() == 80);
    // integer identity: 400 * 1e6 == 128 * 3125000
    CHECK(num.frame_samples() * 1000000ULL ==
          128ULL * static_cast<unsigned long long>(num.sample_rate_hz));
    CHECK(num.frame_duration_s() == 128e-6);
    CHECK(num.payload_bits_per_frame() == 384);
    CHECK(num.data_subcarrier_map().size() == 48);
}

TEST_CASE("numerology validation names the field") {
    OfdmNumerology bad;
    bad.cp_len = 64;
    try {
        bad.validate();
        FAIL("expected a validation error");
    } catch (const std::invalid_argument& ex) {
        CHECK(std::string(ex.what()).find("cp_len") != std::string::npos);
    }
    OfdmNumerology bad2;
    bad2.fft_size = 48;
    CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
}

TEST_CASE("preamble halves are identical and power is one") {
    const OfdmNumerology num;
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL}) {
        const auto pre = cpm::gen_sc_preamble(num, seed);
        REQUIRE(pre.size() == 80);
        // halves after CP removal
        for (std::size_t m = 0; m < 32; ++m) {
            CHECK(std::abs(pre[16 + m] - pre[48 + m]) < 1e-12);
        }
        double power = 0.0;
        for (std::size_t n = 16; n < 80; ++n) power += std::norm(pre[n]);
        CHECK(std::abs(power / 64.0 - 1.0) < 1e-9);
    }
}

TEST_CASE("different PN seeds give distinct preambles") {
    const OfdmNumerology num;
    const auto a = cpm::gen_sc_preamble(num, 1);
    const auto b = cpm::gen_sc_preamble(num, 2);
    double max_diff = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
        max_diff = std::max(max_diff, std::abs(a[n] - b[n]));
    }
    CHECK(max_diff > 0.1);
}

TEST_CASE("preamble bins: even occupied at magnitude sqrt(2), odd zero") {
    const OfdmNumerology num;
    const auto bins = cpm::sc_preamble_bins(num, 7);
    for (std::size_t k = 0; k < 64; ++k) {
        if (k % 2 == 0) {
            CHECK(std::abs(std::abs(bins[k]) - std::numbers::sqrt2) < 1e-12);
        } else {
            CHECK(bins[k] == complex<double>(0.0, 0.0));
        }
    }
}

TEST_CASE("noiseless loopback is bit exact") {
    const OfdmNumerology num;
    cpm::Rng rng(11);
    const auto payload = rng.bits(num.payload_bits_per_frame());
    const auto frame = cpm::modulate_frame(num, payload, 5);
    const auto tx = frame.samples();
    REQUIRE(tx.size() == num.frame_samples());

    cpm::Rng noise(1);
    const auto rx = cpm::apply_channel(tx, identity_channel(), kInf, noise);
    std::span<const complex<double>> rx_span(rx);
    const auto snap = cpm::estimate_channel(rx_span.subspan(16, 64),
                                            cpm::sc_preamble_bins(num, 5), num);
    const auto bits = cpm::demodulate_frame(rx_span, snap, num);
    CHECK(bits == payload);
}

TEST_CASE("all-zero payload survives the identity loopback") {
    const OfdmNumerology num;
    const std::vector<std::uint8_t> payload(num.payload_bits_per_frame(), 0);
    const auto tx = cpm::modulate_frame(num, payload, 5).samples();
    cpm::Rng noise(1);
    const auto rx = cpm::apply_channel(tx, identity_channel(), kInf, noise);
    std::span<const complex<double>> rx_span(rx);
    const auto snap = cpm::estimate_channel(rx_span.subspan(16, 64),
                                            cpm::sc_preamble_bins(num, 5), num);
    CHECK(cpm::demodulate_frame(rx_span, snap, num) == payload);
}

TEST_CASE("a 40-byte payload fits with 64 pad bits") {
    const OfdmNumerology num;
    cpm::Rng rng(13);
    const auto payload = rng.bits(320);
    const auto tx = cpm::modulate_frame(num, payload, 5).samples();
    cpm::Rng noise(1);
    const auto rx = cpm::apply_channel(tx, identity_channel(), kInf, noise);
    std::span<const complex<double>> rx_span(rx);
    const auto snap = cpm::estimate_channel(rx_span.subspan(16, 64),
                                            cpm::sc_preamble_bins(num, 5), num);
    const auto bits = cpm::demodulate_frame(rx_span, snap, num);
    REQUIRE(bits.size() == 384);
    CHECK(std::equal(payload.begin(), payload.end(), bits.begin()));
    CHECK(std::all_of(bits.begin() + 320, bits.end(),
                      [](std::uint8_t b) { return b == 0; }));
}

TEST_CASE("payloads longer than one frame are rejected") {
    const OfdmNumerology num;
    const std::vector<std::uint8_t> too_long(385, 0);
    CHECK_THROWS_AS(cpm::modulate_frame(num, too_long, 5), std::invalid_argument);
}

TEST_CASE("multipath loopback with channel estimate is bit exact") {
    const OfdmNumerology num;
    cpm::Rng rng(21);
    const auto payload = rng.bits(num.payload_bits_per_frame());
    const auto tx = cpm::modulate_frame(num, payload, 5).samples();
    cpm::Rng noise(1);
    const auto rx = cpm::apply_channel(tx, two_tap_channel(), kInf, noise);
    std::span<const complex<double>> rx_span(rx);
    const auto snap = cpm::estimate_channel(rx_span.subspan(16, 64),
                                            cpm::sc_preamble_bins(num, 5), num);
    CHECK(cpm::demodulate_frame(rx_span, snap, num) == payload);
}

TEST_CASE("timing metric: exactly one on the plateau of a clean frame") {
    const OfdmNumerology num;
    const auto tx = cpm::modulate_frame(num, {}, 5).samples();
    const auto metric = cpm::sc_timing_metric(tx, num);
    CHECK(metric[0] >= 0.99);
    CHECK(metric[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(metric[16] == doctest::Approx(1.0).epsilon(1e-12));
    for (const double m : metric) {
        CHECK(m >= 0.0);
        CHECK(m <= 1.0 + 1e-9);
    }
}

TEST_CASE("timing metric stays low on pure noise") {
    const OfdmNumerology num;
    cpm::Rng rng(31);
    int quiet = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<complex<double>> noise(400);
        for (auto& v : noise) v = rng.cnormal(1.0);
        const auto metric = cpm::sc_timing_metric(noise, num);
        const double peak = *std::max_element(metric.begin(), metric.end());
        if (peak < 0.5) ++quiet;
    }
    CHECK(quiet >= 99);
}

TEST_CASE("cfo: zero offset estimated below 1 Hz") {
    const OfdmNumerology num;
    const auto pre = cpm::gen_sc_preamble(num, 5);
    std::span<const complex<double>> core(pre.data() + 16, 64);
    const auto f = cpm::estimate_cfo(core, num);
    REQUIRE(f.has_value());
    CHECK(std::abs(*f) < 1.0);
}

TEST_CASE("cfo: +10 kHz recovered within 1 Hz noiselessly, and the estimator is odd") {
    const OfdmNumerology num;
    const auto pre = cpm::gen_sc_preamble(num, 5);
    for (double f0 : {10e3, 4.2e3, -10e3}) {
        const auto shifted = cpm::apply_cfo(pre, f0, num.sample_rate_hz);
        std::span<const complex<double>> core(shifted.data() + 16, 64);
        const auto f = cpm::estimate_cfo(core, num);
        REQUIRE(f.has_value());
        CHECK(std::abs(*f - f0) < 1.0);
    }
    const auto plus = cpm::apply_cfo(pre, 7e3, num.sample_rate_hz);
    const auto minus = cpm::apply_cfo(pre, -7e3, num.sample_rate_hz);
    const auto fp = cpm::estimate_cfo(
        std::span<const complex<double>>(plus.data() + 16, 64), num);
    const auto fm = cpm::estimate_cfo(
        std::span<const complex<double>>(minus.data() + 16, 64), num);
    CHECK(std::abs(*fp + *fm) < 1e-6);
}

TEST_CASE("cfo at 20 dB: error spread matches the half-correlation bound") {
    // The half-symbol correlation over L = 32 gives sigma_f ~= 275 Hz at
    // 20 dB; 1.96 sigma ~= 540 Hz, so 95% of trials land within ~600 Hz.
    const OfdmNumerology num;
    const auto pre = cpm::gen_sc_preamble(num, 5);
    const auto shifted = cpm::apply_cfo(pre, 10e3, num.sample_rate_hz);
    cpm::Rng rng(404);
    const auto ident = identity_channel();
    int within = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        const auto rx = cpm::apply_channel(shifted, ident, 20.0, rng);
        std::span<const complex<double>> core(rx.data() + 16, 64);
        const auto f = cpm::estimate_cfo(core, num);
        REQUIRE(f.has_value());
        if (std::abs(*f - 10e3) <= 600.0) ++within;
    }
    CHECK(within >= 950);
}

TEST_CASE("cfo estimation refuses pure noise") {
    const OfdmNumerology num;
    cpm::Rng rng(77);
    int refused = 0;
    for (int t = 0; t < 100; ++t) {
        std::vector<complex<double>> noise(64);
        for (auto& v : noise) v = rng.cnormal(1.0);
        if (!cpm::estimate_cfo(noise, num)) ++refused;
    }
    CHECK(refused >= 99);
}

TEST_CASE("channel estimate: identity channel gives all-ones") {
    const OfdmNumerology num;
    const auto pre = cpm::gen_sc_preamble(num, 5);
    std::span<const complex<double>> core(pre.data() + 16, 64);
    const auto snap = cpm::estimate_channel(core, cpm::sc_preamble_bins(num, 5), num);
    REQUIRE(snap.h.size() == 64);
    for (const auto& h : snap.h) {
        CHECK(std::abs(h - complex<double>(1.0, 0.0)) < 1e-9);
    }
}

TEST_CASE("channel estimate matches the analytic two-tap response") {
    const OfdmNumerology num;
    const auto chan = two_tap_channel();
    const auto pre = cpm::gen_sc_preamble(num, 5);
    cpm::Rng noise(1);
    const auto rx = cpm::apply_channel(pre, chan, kInf, noise);
    std::span<const complex<double>> core(rx.data() + 16, 64);
    const auto snap = cpm::estimate_channel(core, cpm::sc_preamble_bins(num, 5), num);
    const auto analytic = oracle::naive_dft(chan.taps, 64);
    for (std::size_t k = 0; k < 64; k += 2) {
        CHECK(std::abs(snap.h[k] - analytic[k]) < 1e-9);
    }
    // odd bins carry only the interpolation error of the smooth response
    for (std::size_t k = 1; k < 64; k += 2) {
        const auto interp = 0.5 * (analytic[k - 1] + analytic[(k + 1) % 64]);
        CHECK(std::abs(snap.h[k] - interp) < 1e-9);
        CHECK(std::abs(snap.h[k] - analytic[k]) < 0.05);
    }
}

TEST_CASE("channel estimator is linear in the input") {
    const OfdmNumerology num;
    const auto chan = two_tap_channel();
    const auto pre = cpm::gen_sc_preamble(num, 5);
    cpm::Rng noise(1);
    const auto rx = cpm::apply_channel(pre, chan, 25.0, noise);
    std::vector<complex<double>> scaled(rx.size());
    const complex<double> a(1.7, -0.4);
    for (std::size_t n = 0; n < rx.size(); ++n) scaled[n] = a * rx[n];
    const auto bins = cpm::sc_preamble_bins(num, 5);
    std::span<const complex<double>> core(rx.data() + 16, 64);
    std::span<const complex<double>> score(scaled.data() + 16, 64);
    const auto s1 = cpm::estimate_channel(core, bins, num);
    const auto s2 = cpm::estimate_channel(score, bins, num);
    for (std::size_t k = 0; k < 64; ++k) {
        CHECK(std::abs(s2.h[k] - a * s1.h[k]) < 1e-12);
    }
}

TEST_CASE("channel estimate rejects a zero even known bin") {
    const OfdmNumerology num;
    const auto pre = cpm::gen_sc_preamble(num, 5);
    auto bins = cpm::sc_preamble_bins(num, 5);
    bins[2] = 0.0;
    std::span<const complex<double>> core(pre.data() + 16, 64);
    CHECK_THROWS_AS(cpm::estimate_channel(core, bins, num), std::invalid_argument);
}

TEST_CASE("per-bin estimate error variance tracks noise / |X|^2") {
    const OfdmNumerology num;
    const auto pre = cpm::gen_sc_preamble(num, 5);
    const auto bins = cpm::sc_preamble_bins(num, 5);
    const auto ident = identity_channel();
    cpm::Rng rng(6060);
    const double snr_db = 20.0;
    // preamble-only block at unit power: noise variance = 10^-2
    const double expected = std::pow(10.0, -snr_db / 10.0) / 2.0;
    double acc = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const auto rx = cpm::apply_channel(pre, ident, snr_db, rng);
        std::span<const complex<double>> core(rx.data() + 16, 64);
        const auto snap = cpm::estimate_channel(core, bins, num);
        for (std::size_t k = 0; k < 64; k += 2) {
            acc += std::norm(snap.h[k] - complex<double>(1.0, 0.0));
        }
    }
    const double measured = acc / (32.0 * trials);
    CHECK(measured < expected * 1.5);
    CHECK(measured > expected / 1.5);
}

TEST_CASE("iq dump round-trips and is little-endian") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "cpm_iq_test.bin";
    const std::vector<complex<double>> x = {{1.0, -2.0}, {0.5, 0.25}};
    cpm::write_iq(path.string(), x);
    REQUIRE(fs::file_size(path) == 16);
    const auto back = cpm::read_iq(path.string());
    REQUIRE(back.size() == 2);
    CHECK(back[0] == complex<double>(1.0, -2.0));
    CHECK(back[1] == complex<double>(0.5, 0.25));
    // 1.0f little-endian: 00 00 80 3f
    std::FILE* f = std::fopen(path.string().c_str(), "rb");
    REQUIRE(f != nullptr);
    unsigned char bytes[4];
    REQUIRE(std::fread(bytes, 1, 4, f) == 4);
    std::fclose(f);
    CHECK(bytes[0] == 0x00);
    CHECK(bytes[1] == 0x00);
    CHECK(bytes[2] == 0x80);
    CHECK(bytes[3] == 0x3f);
    fs::remove(path);
}

TEST_CASE("unitary fft: parseval and round trip") {
    cpm::Rng rng(8);
    std::vector<complex<double>> x(64);
    for (auto& v : x) v = rng.cnormal(1.0);
    const auto X = cpm::fft_unitary(x, false);
    double px = 0.0;
    double pX = 0.0;
    for (std::size_t i = 0; i < 64; ++i) {
        px += std::norm(x[i]);
        pX += std::norm(X[i]);
    }
    CHECK(std::abs(px - pX) < 1e-10);
    const auto back = cpm::fft_unitary(X, true);
    for (std::size_t i = 0; i < 64; ++i) {
        CHECK(std::abs(back[i] - x[i]) < 1e-12);
    }
}

}  // TEST_SUITE
