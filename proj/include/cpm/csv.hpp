// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cpm/detector.hpp"
#include "cpm/harness.hpp"

namespace cpm {

/// Deterministic shortest-round-trip formatting ("%.17g"; NaN -> "nan").
std::string format_double(double v);

std::string origin_name(Origin o);
std::string verdict_name(Verdict v);

/// One summary row: axis_value,seed,bob_drop_rate,eve_drop_rate,e_th.
/// axis_value is "-" for plain (non-sweep) runs.
struct SummaryRow {
    std::string axis_value = "-";
    std::uint64_t seed = 0;
    double bob_drop_rate = 0.0;
    double eve_drop_rate = 0.0;
    double e_th = 0.0;
};

/// Per-packet trace: k,truth,e,pcc,verdict,sync_ok (header included).
void write_packets_csv(const std::filesystem::path& path,
                       const std::vector<ErrorRecord>& records);

void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<SummaryRow>& rows);

/// Calibration errors: k,e_ab_ref,e_ae_ref.
void write_reference_csv(const std::filesystem::path& path, const ReferenceSet& refset);

/// Per-value sweep aggregates: axis_value,mean_bob,std_bob,mean_eve,std_eve.
void write_sweep_aggregate_csv(const std::filesystem::path& path,
                               const std::vector<SweepAggregate>& aggregates);

}  // namespace cpm
