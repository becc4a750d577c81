// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpm/channel.hpp"
#include "cpm/detector.hpp"
#include "cpm/ofdm.hpp"

namespace cpm {

/// Who transmits at slot k. Eve's packets are protocol-perfect; only the
/// channel distinguishes her.
struct AttackSchedule {
    enum class Type { none, interleaved, burst, replay };

    Type type = Type::none;
    double eve_fraction = 0.5;      // interleaved
    std::uint64_t start = 0;        // burst
    std::uint64_t length = 0;       // burst
    std::uint64_t delay_packets = 1;  // replay: age of the replayed payload

    void validate() const;
    bool is_eve(std::uint64_t k) const;
};

/// Detector setup for a run: explicit threshold or calibrate-first.
struct DetectorConfig {
    enum class Mode { calibrate_first, fixed };

    Mode mode = Mode::calibrate_first;
    double e_th = 0.0;  // used when mode == fixed
    PccMode pcc_mode = PccMode::reim;
    ThresholdRule threshold_rule = ThresholdRule::half_gap;

    void validate() const;
};

/// Tapped-delay-line profile knobs (assumed, exposed as config).
struct ChannelParams {
    std::size_t num_taps = 8;
    double pdp_floor_db = -20.0;  // last tap relative to first

    double decay() const { return pdp_decay_for_floor_db(num_taps, pdp_floor_db); }
    void validate() const;
};

enum class SweepAxis { d_be, snr_db, temporal_rho, e_th };

struct SweepSpec {
    SweepAxis axis = SweepAxis::d_be;
    std::vector<double> values;
    std::vector<std::uint64_t> seeds;

    void validate() const;
};

/// Declarative experiment description. Identical configs (including seed)
/// reproduce identical traces byte for byte.
struct ScenarioConfig {
    SpatialGeometry geometry;
    OfdmNumerology numerology;
    ChannelParams channel;
    double snr_db = 20.0;
    double temporal_rho = 1.0;
    std::uint64_t num_packets = 10000;
    AttackSchedule attack;
    std::uint64_t seed = 1;
    DetectorConfig detector;
    UpdatePolicy update_policy = UpdatePolicy::on_accept;
    double sync_threshold = 0.5;
    std::optional<SweepSpec> sweep;

    void validate() const;
};

/// Calibration output: labeled reference errors plus bookkeeping.
struct CalibrationRun {
    ReferenceSet refset;
    std::uint64_t sync_failures = 0;
    double mean_e_ab = 0.0;
    double mean_e_ae = 0.0;
};

struct CalibrationSummary {
    double mean_e_ab = 0.0;
    double mean_e_ae = 0.0;
    std::uint64_t num_pairs = 0;
};

/// Aggregated result of one scenario run.
struct RunReport {
    double bob_drop_rate = 0.0;
    double eve_drop_rate = 0.0;
    double e_th_used = 0.0;
    std::uint64_t bob_total = 0;
    std::uint64_t bob_dropped = 0;
    std::uint64_t eve_total = 0;
    std::uint64_t eve_dropped = 0;
    std::uint64_t sync_failures_bob = 0;
    std::uint64_t sync_failures_eve = 0;
    std::optional<CalibrationSummary> calibration;
    std::vector<ErrorRecord> records;
};

/// Labeled calibration phase: per index k both Bob and Eve transmit, each
/// error taken against the previous Bob snapshot. Uses calibration-tagged
/// noise/payload streams; the channel trajectory is derived from the
/// scenario seed alone, so a later evaluation sees the same environment.
CalibrationRun run_calibration(const ScenarioConfig& config);

/// Full scenario: schedule-driven transmissions, per-packet decisions,
/// drop-rate accounting. With calibrate-first the threshold comes from a
/// disjoint calibration pass over the same seed.
RunReport run_scenario(const ScenarioConfig& config);

struct SweepCell {
    double value = 0.0;
    std::uint64_t seed = 0;
    RunReport report;
    bool failed = false;
    std::string error;
};

struct SweepAggregate {
    double value = 0.0;
    double mean_bob = 0.0;
    double std_bob = 0.0;
    double mean_eve = 0.0;
    double std_eve = 0.0;
};

struct SweepResult {
    std::vector<SweepCell> cells;          // ordered by (value, seed)
    std::vector<SweepAggregate> aggregates;
};

/// One run per (value, seed) cell; cells execute independently (possibly in
/// parallel) and aggregate deterministically. With calibrate-first the
/// threshold is calibrated once per seed on the base config and then held
/// fixed along the axis (the e_th axis overrides it per cell).
SweepResult sweep(const ScenarioConfig& config, const SweepSpec& spec);

/// Payload overhead of a message integrity code, in percent.
double mic_overhead(std::uint64_t mic_bytes, std::uint64_t payload_bytes);

/// Percentage formatted to two decimals with trailing zeros trimmed
/// ("3.54", "10").
std::string format_percent(double percent);

struct MicTableRow {
    std::string system;
    std::uint64_t mic_bytes = 0;
    std::uint64_t payload_bytes = 0;
};

/// The six standard MIC-overhead rows (IEEE 802.15.4 payload 113 B and a
/// 40 B machine-type payload, each with 4/8/16 B codes).
const std::vector<MicTableRow>& mic_overhead_rows();

/// Render the overhead table as printable lines (header + six rows).
std::vector<std::string> render_mic_table();

}  // namespace cpm
