// SPDX-License-Identifier: Apache-2.0

#include "cpm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <future>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

namespace cpm {

namespace {

/// The Schmidl-Cox preamble is known to every participant (Eve included).
constexpr std::uint64_t kPreamblePnSeed = 0xC0FFEE;

}  // namespace

void AttackSchedule::validate() const {
    switch (type) {
        case Type::none:
            break;
        case Type::interleaved:
            if (!(eve_fraction >= 0.0 && eve_fraction <= 1.0)) {
                throw std::invalid_argument("attack.eve_fraction: must be in [0, 1]");
            }
            break;
        case Type::burst:
            if (length == 0) throw std::invalid_argument("attack.length: must be >= 1");
            break;
        case Type::replay:
            if (delay_packets == 0) {
                throw std::invalid_argument("attack.delay_packets: must be >= 1");
            }
            break;
    }
}

bool AttackSchedule::is_eve(std::uint64_t k) const {
    switch (type) {
        case Type::none:
            return false;
        case Type::interleaved:
        case Type::replay: {
            // Bresenham-style deterministic interleaving at eve_fraction
            // (replay uses the default 1/2: alternate Bob / replaying Eve).
            const double f = type == Type::interleaved ? eve_fraction : 0.5;
            const auto count = [f](std::uint64_t n) {
                return static_cast<std::uint64_t>(std::floor(f * static_cast<double>(n)));
            };
            return count(k + 1) > count(k);
        }
        case Type::burst:
            return k >= start && k < start + length;
    }
    return false;
}

void DetectorConfig::validate() const {
    if (mode == Mode::fixed && !(e_th >= 0.0)) {
        throw std::invalid_argument("detector.e_th: must be >= 0");
    }
}

void ChannelParams::validate() const {
    if (num_taps < 1) throw std::invalid_argument("channel.num_taps: must be >= 1");
    if (num_taps > 1 && !(pdp_floor_db < 0.0)) {
        throw std::invalid_argument("channel.pdp_floor_db: must be < 0");
    }
}

void SweepSpec::validate() const {
    if (values.empty()) throw std::invalid_argument("sweep.values: must be non-empty");
    if (seeds.empty()) throw std::invalid_argument("sweep.seeds: must be non-empty");
    for (const double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("sweep.values: must be finite");
        if (axis != SweepAxis::temporal_rho && v < 0.0) {
            throw std::invalid_argument("sweep.values: must be >= 0");
        }
        if (axis == SweepAxis::temporal_rho && !(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("sweep.values: temporal_rho must be in [0, 1]");
        }
    }
}

void ScenarioConfig::validate() const {
    geometry.validate();
    numerology.validate();
    channel.validate();
    attack.validate();
    detector.validate();
    if (std::isnan(snr_db)) throw std::invalid_argument("snr_db: must not be NaN");
    if (!(temporal_rho >= 0.0 && temporal_rho <= 1.0)) {
        throw std::invalid_argument("temporal_rho: must be in [0, 1]");
    }
    if (num_packets < 1) throw std::invalid_argument("num_packets: must be >= 1");
    if (!(sync_threshold >= 0.0 && sync_threshold <= 1.0)) {
        throw std::invalid_argument("sync_threshold: must be in [0, 1]");
    }
    if (channel.num_taps > numerology.cp_len + 1) {
        throw std::invalid_argument(
            "channel.num_taps: delay spread must fit within the cyclic prefix");
    }
    if (sweep) sweep->validate();
}

namespace {

/// Receive-side outcome for one transmitted frame.
struct PacketRx {
    bool sync_ok = false;
    ChannelSnapshot snapshot;
};

/// Modulate -> fade -> add noise -> synchronize -> CFO-correct -> estimate.
/// Frames are generated time-aligned; the timing metric is evaluated at the
/// true symbol start and packets below the sync threshold are skipped.
class PacketPipeline {
  public:
    PacketPipeline(const ScenarioConfig& config, std::uint64_t noise_seed,
                   std::uint64_t payload_seed)
        : num_(config.numerology),
          snr_db_(config.snr_db),
          sync_threshold_(config.sync_threshold),
          known_bins_(sc_preamble_bins(config.numerology, kPreamblePnSeed)),
          noise_rng_(noise_seed),
          payload_rng_(payload_seed) {}

    std::vector<std::uint8_t> next_payload() {
        return payload_rng_.bits(num_.payload_bits_per_frame());
    }

    PacketRx transmit(FadingLink& link, Origin truth, std::uint64_t k,
                      const std::vector<std::uint8_t>& payload) {
        const ChannelRealization& realization = link.step();
        const OfdmFrame frame = modulate_frame(num_, payload, kPreamblePnSeed);
        const auto tx = frame.samples();
        const auto rx = apply_channel(tx, realization, snr_db_, noise_rng_);

        PacketRx result;
        std::span<const std::complex<double>> rx_span(rx);
        const double metric = sc_timing_metric_at(rx_span, num_.cp_len, num_);
        if (metric < sync_threshold_) return result;

        auto core = rx_span.subspan(num_.cp_len, num_.fft_size);
        const auto cfo = estimate_cfo(core, num_);
        if (!cfo) return result;
        const auto corrected =
            apply_cfo(rx_span, -*cfo, num_.sample_rate_hz, num_.cp_len);
        std::span<const std::complex<double>> corr_span(corrected);

        result.snapshot = estimate_channel(corr_span.subspan(num_.cp_len, num_.fft_size),
                                           known_bins_, num_);
        result.snapshot.timestamp_k = k;
        result.snapshot.source_label = truth;
        result.sync_ok = true;
        return result;
    }

  private:
    OfdmNumerology num_;
    double snr_db_;
    double sync_threshold_;
    std::vector<std::complex<double>> known_bins_;
    Rng noise_rng_;
    Rng payload_rng_;
};

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double acc = 0.0;
    for (const double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

}  // namespace

CalibrationRun run_calibration(const ScenarioConfig& config) {
    config.validate();
    auto [bob, eve] = make_linked_pair(config.geometry, config.channel.decay(),
                                       config.channel.num_taps, config.temporal_rho,
                                       config.seed, config.numerology.fft_size);
    PacketPipeline pipeline(config,
                            derive_seed(config.seed, Stream::calibration_noise),
                            derive_seed(config.seed, Stream::calibration_payload));

    CalibrationRun out;
    const std::uint64_t n = config.num_packets;

    // Seed reference: first successfully received Bob packet.
    std::optional<ChannelSnapshot> reference;
    std::uint64_t k = 0;
    while (!reference) {
        auto rx = pipeline.transmit(bob, Origin::bob, k++, pipeline.next_payload());
        if (rx.sync_ok) {
            reference = std::move(rx.snapshot);
        } else {
            ++out.sync_failures;
            if (k > 100 * (n + 1)) {
                throw std::runtime_error(
                    "calibration: no packet synchronized; SNR too low");
            }
        }
    }

    out.refset.e_ab_ref.reserve(n);
    out.refset.e_ae_ref.reserve(n);
    while (out.refset.e_ab_ref.size() < n) {
        auto rx_bob = pipeline.transmit(bob, Origin::bob, k, pipeline.next_payload());
        auto rx_eve = pipeline.transmit(eve, Origin::eve, k, pipeline.next_payload());
        ++k;
        if (!rx_bob.sync_ok || !rx_eve.sync_ok) {
            // Keep the set pairwise-consistent: skip incomplete pairs.
            out.sync_failures += !rx_bob.sync_ok;
            out.sync_failures += !rx_eve.sync_ok;
            if (rx_bob.sync_ok) reference = std::move(rx_bob.snapshot);
            if (k > 100 * (n + 1)) {
                throw std::runtime_error(
                    "calibration: too many sync failures; SNR too low");
            }
            continue;
        }
        out.refset.e_ab_ref.push_back(mse(rx_bob.snapshot.h, reference->h));
        out.refset.e_ae_ref.push_back(mse(rx_eve.snapshot.h, reference->h));
        reference = std::move(rx_bob.snapshot);
    }
    out.mean_e_ab = mean_of(out.refset.e_ab_ref);
    out.mean_e_ae = mean_of(out.refset.e_ae_ref);
    return out;
}

RunReport run_scenario(const ScenarioConfig& config) {
    config.validate();

    RunReport report;
    double e_th = config.detector.e_th;
    if (config.detector.mode == DetectorConfig::Mode::calibrate_first) {
        const CalibrationRun cal = run_calibration(config);
        e_th = threshold_from_rule(cal.refset, config.detector.threshold_rule);
        report.calibration = CalibrationSummary{
            cal.mean_e_ab, cal.mean_e_ae,
            static_cast<std::uint64_t>(cal.refset.e_ab_ref.size())};
    }
    report.e_th_used = e_th;

    auto [bob, eve] = make_linked_pair(config.geometry, config.channel.decay(),
                                       config.channel.num_taps, config.temporal_rho,
                                       config.seed, config.numerology.fft_size);
    PacketPipeline pipeline(config,
                            derive_seed(config.seed, Stream::evaluation_noise),
                            derive_seed(config.seed, Stream::evaluation_payload));
    DetectorState detector(e_th, config.update_policy, config.detector.pcc_mode);

    // Replayed payloads: Eve retransmits Bob's recorded bits after a delay.
    std::deque<std::vector<std::uint8_t>> recorded_payloads;

    report.records.reserve(config.num_packets);
    for (std::uint64_t k = 0; k < config.num_packets; ++k) {
        const bool is_eve = config.attack.is_eve(k);
        const Origin truth = is_eve ? Origin::eve : Origin::bob;

        std::vector<std::uint8_t> payload;
        if (is_eve && config.attack.type == AttackSchedule::Type::replay &&
            recorded_payloads.size() >= config.attack.delay_packets) {
            payload = recorded_payloads[recorded_payloads.size() -
                                        config.attack.delay_packets];
        } else {
            payload = pipeline.next_payload();
        }
        if (!is_eve && config.attack.type == AttackSchedule::Type::replay) {
            recorded_payloads.push_back(payload);
            if (recorded_payloads.size() > config.attack.delay_packets) {
                recorded_payloads.pop_front();
            }
        }

        auto rx = pipeline.transmit(is_eve ? eve : bob, truth, k, payload);

        ErrorRecord rec;
        if (!rx.sync_ok) {
            rec.k = k;
            rec.truth = truth;
            rec.e = std::numeric_limits<double>::quiet_NaN();
            rec.pcc = std::numeric_limits<double>::quiet_NaN();
            rec.verdict = Verdict::drop;
            rec.sync_ok = false;
            (is_eve ? report.sync_failures_eve : report.sync_failures_bob) += 1;
        } else {
            rec = detector.decide(rx.snapshot);
            rec.sync_ok = true;
        }
        report.records.push_back(rec);

        if (is_eve) {
            ++report.eve_total;
            if (rec.verdict == Verdict::drop) ++report.eve_dropped;
        } else {
            ++report.bob_total;
            if (rec.verdict == Verdict::drop) ++report.bob_dropped;
        }
    }

    report.bob_drop_rate =
        report.bob_total == 0
            ? 0.0
            : static_cast<double>(report.bob_dropped) / static_cast<double>(report.bob_total);
    report.eve_drop_rate =
        report.eve_total == 0
            ? 0.0
            : static_cast<double>(report.eve_dropped) / static_cast<double>(report.eve_total);
    return report;
}

namespace {

ScenarioConfig cell_config(const ScenarioConfig& base, SweepAxis axis, double value,
                           std::uint64_t seed, const std::map<std::uint64_t, double>& e_ths) {
    ScenarioConfig cfg = base;
    cfg.seed = seed;
    cfg.sweep.reset();
    switch (axis) {
        case SweepAxis::d_be:
            cfg.geometry.d_be_m = value;
            break;
        case SweepAxis::snr_db:
            cfg.snr_db = value;
            break;
        case SweepAxis::temporal_rho:
            cfg.temporal_rho = value;
            break;
        case SweepAxis::e_th:
            break;  // handled below
    }
    if (axis == SweepAxis::e_th) {
        cfg.detector.mode = DetectorConfig::Mode::fixed;
        cfg.detector.e_th = value;
    } else if (base.detector.mode == DetectorConfig::Mode::calibrate_first) {
        // Threshold calibrated once per seed on the base geometry and held
        // fixed along the axis, so cells stay comparable.
        cfg.detector.mode = DetectorConfig::Mode::fixed;
        cfg.detector.e_th = e_ths.at(seed);
    }
    return cfg;
}

}  // namespace

SweepResult sweep(const ScenarioConfig& config, const SweepSpec& spec) {
    config.validate();
    spec.validate();

    // Per-seed thresholds from the base config (when calibrating).
    std::map<std::uint64_t, double> e_ths;
    if (spec.axis != SweepAxis::e_th &&
        config.detector.mode == DetectorConfig::Mode::calibrate_first) {
        for (const std::uint64_t seed : spec.seeds) {
            if (e_ths.count(seed)) continue;
            ScenarioConfig cal_cfg = config;
            cal_cfg.seed = seed;
            cal_cfg.sweep.reset();
            const CalibrationRun cal = run_calibration(cal_cfg);
            e_ths[seed] =
                threshold_from_rule(cal.refset, config.detector.threshold_rule);
        }
    }

    SweepResult result;
    result.cells.resize(spec.values.size() * spec.seeds.size());

    const auto run_cell = [&](std::size_t idx) {
        const double value = spec.values[idx / spec.seeds.size()];
        const std::uint64_t seed = spec.seeds[idx % spec.seeds.size()];
        SweepCell& cell = result.cells[idx];
        cell.value = value;
        cell.seed = seed;
        try {
            cell.report = run_scenario(cell_config(config, spec.axis, value, seed, e_ths));
        } catch (const std::exception& ex) {
            cell.failed = true;
            cell.error = ex.what();
        }
    };

    const std::size_t cells = result.cells.size();
    const std::size_t workers =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), cells);
    if (workers <= 1) {
        for (std::size_t i = 0; i < cells; ++i) run_cell(i);
    } else {
        std::vector<std::future<void>> futures;
        futures.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            futures.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < cells; i += workers) run_cell(i);
            }));
        }
        for (auto& f : futures) f.get();
    }

    for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
        SweepAggregate agg;
        agg.value = spec.values[vi];
        std::vector<double> bob;
        std::vector<double> eve;
        for (std::size_t si = 0; si < spec.seeds.size(); ++si) {
            const SweepCell& cell = result.cells[vi * spec.seeds.size() + si];
            if (cell.failed) continue;
            bob.push_back(cell.report.bob_drop_rate);
            eve.push_back(cell.report.eve_drop_rate);
        }
        const auto stddev = [](const std::vector<double>& v, double m) {
            if (v.size() < 2) return 0.0;
            double acc = 0.0;
            for (const double x : v) acc += (x - m) * (x - m);
            return std::sqrt(acc / static_cast<double>(v.size() - 1));
        };
        agg.mean_bob = mean_of(bob);
        agg.mean_eve = mean_of(eve);
        agg.std_bob = stddev(bob, agg.mean_bob);
        agg.std_eve = stddev(eve, agg.mean_eve);
        result.aggregates.push_back(agg);
    }
    return result;
}

double mic_overhead(std::uint64_t mic_bytes, std::uint64_t payload_bytes) {
    if (payload_bytes == 0) {
        throw std::invalid_argument("payload_bytes: must be >= 1");
    }
    return 100.0 * static_cast<double>(mic_bytes) / static_cast<double>(payload_bytes);
}

std::string format_percent(double percent) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", percent);
    std::string s(buf);
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    return s;
}

const std::vector<MicTableRow>& mic_overhead_rows() {
    static const std::vector<MicTableRow> rows = {
        {"IEEE 802.15.4", 4, 113}, {"IEEE 802.15.4", 8, 113},
        {"IEEE 802.15.4", 16, 113}, {"MC-MTC", 4, 40},
        {"MC-MTC", 8, 40},          {"MC-MTC", 16, 40},
    };
    return rows;
}

std::vector<std::string> render_mic_table() {
    std::vector<std::string> lines;
    lines.push_back("System         MIC size  MAC payload  MIC overhead");
    for (const auto& row : mic_overhead_rows()) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-13s  %8llu  %11llu  %s%%",
                      row.system.c_str(),
                      static_cast<unsigned long long>(row.mic_bytes),
                      static_cast<unsigned long long>(row.payload_bytes),
                      format_percent(mic_overhead(row.mic_bytes, row.payload_bytes)).c_str());
        lines.emplace_back(buf);
    }
    return lines;
}

}  // namespace cpm
