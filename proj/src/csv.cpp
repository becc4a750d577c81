// SPDX-License-Identifier: Apache-2.0

#include "cpm/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace cpm {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string origin_name(Origin o) {
    switch (o) {
        case Origin::bob: return "bob";
        case Origin::eve: return "eve";
        case Origin::unknown: break;
    }
    return "unknown";
}

std::string verdict_name(Verdict v) {
    return v == Verdict::accept ? "accept" : "drop";
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    return f;
}

void finish(std::ofstream& f, const std::filesystem::path& path) {
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void write_packets_csv(const std::filesystem::path& path,
                       const std::vector<ErrorRecord>& records) {
    auto f = open_out(path);
    f << "k,truth,e,pcc,verdict,sync_ok\n";
    for (const auto& rec : records) {
        f << rec.k << ',' << origin_name(rec.truth) << ',' << format_double(rec.e)
          << ',' << format_double(rec.pcc) << ',' << verdict_name(rec.verdict) << ','
          << (rec.sync_ok ? 1 : 0) << '\n';
    }
    finish(f, path);
}

void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<SummaryRow>& rows) {
    auto f = open_out(path);
    f << "axis_value,seed,bob_drop_rate,eve_drop_rate,e_th\n";
    for (const auto& row : rows) {
        f << row.axis_value << ',' << row.seed << ','
          << format_double(row.bob_drop_rate) << ',' << format_double(row.eve_drop_rate)
          << ',' << format_double(row.e_th) << '\n';
    }
    finish(f, path);
}

void write_reference_csv(const std::filesystem::path& path, const ReferenceSet& refset) {
    auto f = open_out(path);
    f << "k,e_ab_ref,e_ae_ref\n";
    for (std::size_t k = 0; k < refset.e_ab_ref.size(); ++k) {
        f << k << ',' << format_double(refset.e_ab_ref[k]) << ','
          << format_double(refset.e_ae_ref[k]) << '\n';
    }
    finish(f, path);
}

void write_sweep_aggregate_csv(const std::filesystem::path& path,
                               const std::vector<SweepAggregate>& aggregates) {
    auto f = open_out(path);
    f << "axis_value,mean_bob_drop_rate,std_bob_drop_rate,mean_eve_drop_rate,"
         "std_eve_drop_rate\n";
    for (const auto& agg : aggregates) {
        f << format_double(agg.value) << ',' << format_double(agg.mean_bob) << ','
          << format_double(agg.std_bob) << ',' << format_double(agg.mean_eve) << ','
          << format_double(agg.std_eve) << '\n';
    }
    finish(f, path);
}

}  // namespace cpm
