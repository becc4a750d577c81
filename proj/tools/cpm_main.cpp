// SPDX-License-Identifier: Apache-2.0
//
// cpm: channel-profile-monitoring packet authentication simulator.
// Subcommands: calibrate, run, sweep, table, demo.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpm/config.hpp"
#include "cpm/csv.hpp"
#include "cpm/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
};

json load_config_doc(const CommonArgs& args) {
    json doc = json::object();
    if (!args.config_path.empty()) {
        std::ifstream f(args.config_path);
        if (!f) throw cpm::ConfigError("cannot open config file: " + args.config_path);
        try {
            doc = json::parse(f);
        } catch (const json::parse_error& ex) {
            throw cpm::ConfigError("malformed JSON in " + args.config_path + ": " +
                                   ex.what());
        }
    }
    for (const auto& assignment : args.overrides) {
        cpm::apply_override(doc, assignment);
    }
    if (args.seed) doc["seed"] = *args.seed;
    return doc;
}

cpm::ScenarioConfig load_config(const CommonArgs& args) {
    return cpm::parse_config_json(load_config_doc(args));
}

fs::path ensure_out_dir(const CommonArgs& args) {
    fs::path dir(args.out_dir);
    fs::create_directories(dir);
    return dir;
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << doc.dump(2) << '\n';
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

void verify_outputs(const fs::path& dir, const std::vector<std::string>& names) {
    for (const auto& name : names) {
        const fs::path p = dir / name;
        if (!fs::exists(p) || fs::file_size(p) == 0) {
            throw std::runtime_error("output missing or empty: " + p.string());
        }
    }
}

json manifest_base(const std::string& command, const cpm::ScenarioConfig& config) {
    json m;
    m["tool"] = "cpm";
    m["version"] = kVersion;
    m["command"] = command;
    m["seed"] = config.seed;
    m["config"] = cpm::effective_config_json(config);
    return m;
}

json calibration_json(const cpm::CalibrationSummary& cal) {
    return {{"mean_e_ab", cal.mean_e_ab},
            {"mean_e_ae", cal.mean_e_ae},
            {"num_pairs", cal.num_pairs}};
}

int cmd_run(const CommonArgs& args) {
    const auto config = load_config(args);
    const auto dir = ensure_out_dir(args);
    const auto report = cpm::run_scenario(config);

    cpm::write_packets_csv(dir / "packets.csv", report.records);
    cpm::write_summary_csv(dir / "summary.csv",
                           {{"-", config.seed, report.bob_drop_rate,
                             report.eve_drop_rate, report.e_th_used}});
    write_json(dir / "effective_config.json", cpm::effective_config_json(config));

    json m = manifest_base("run", config);
    m["e_th_used"] = report.e_th_used;
    m["bob_drop_rate"] = report.bob_drop_rate;
    m["eve_drop_rate"] = report.eve_drop_rate;
    m["sync_failures"] = {{"bob", report.sync_failures_bob},
                          {"eve", report.sync_failures_eve}};
    if (report.calibration) m["calibration"] = calibration_json(*report.calibration);
    m["outputs"] = {"packets.csv", "summary.csv", "effective_config.json",
                    "manifest.json"};
    write_json(dir / "manifest.json", m);
    verify_outputs(dir, {"packets.csv", "summary.csv", "effective_config.json",
                         "manifest.json"});

    std::printf("e_th = %.6g\n", report.e_th_used);
    std::printf("bob_drop_rate = %.4f%% (%llu/%llu)\n", 100.0 * report.bob_drop_rate,
                static_cast<unsigned long long>(report.bob_dropped),
                static_cast<unsigned long long>(report.bob_total));
    std::printf("eve_drop_rate = %.4f%% (%llu/%llu)\n", 100.0 * report.eve_drop_rate,
                static_cast<unsigned long long>(report.eve_dropped),
                static_cast<unsigned long long>(report.eve_total));
    std::printf("outputs: %s\n", dir.string().c_str());
    return 0;
}

int cmd_calibrate(const CommonArgs& args) {
    const auto config = load_config(args);
    const auto dir = ensure_out_dir(args);
    const auto cal = cpm::run_calibration(config);
    const double e_th =
        cpm::threshold_from_rule(cal.refset, config.detector.threshold_rule);

    cpm::write_reference_csv(dir / "reference_set.csv", cal.refset);
    write_json(dir / "effective_config.json", cpm::effective_config_json(config));

    json m = manifest_base("calibrate", config);
    m["e_th"] = e_th;
    m["calibration"] = {{"mean_e_ab", cal.mean_e_ab},
                        {"mean_e_ae", cal.mean_e_ae},
                        {"num_pairs", cal.refset.e_ab_ref.size()},
                        {"sync_failures", cal.sync_failures}};
    m["outputs"] = {"reference_set.csv", "effective_config.json", "manifest.json"};
    write_json(dir / "manifest.json", m);
    verify_outputs(dir, {"reference_set.csv", "effective_config.json", "manifest.json"});

    std::printf("mean_e_ab = %.6g\nmean_e_ae = %.6g\ne_th = %.6g\n", cal.mean_e_ab,
                cal.mean_e_ae, e_th);
    std::printf("outputs: %s\n", dir.string().c_str());
    return 0;
}

int cmd_sweep(const CommonArgs& args) {
    const auto config = load_config(args);
    if (!config.sweep) {
        throw cpm::ConfigError("sweep: config must contain a \"sweep\" section");
    }
    const auto dir = ensure_out_dir(args);
    const auto result = cpm::sweep(config, *config.sweep);

    std::vector<cpm::SummaryRow> rows;
    rows.reserve(result.cells.size());
    for (const auto& cell : result.cells) {
        if (cell.failed) {
            std::fprintf(stderr, "cell (value=%g, seed=%llu) failed: %s\n", cell.value,
                         static_cast<unsigned long long>(cell.seed), cell.error.c_str());
            continue;
        }
        rows.push_back({cpm::format_double(cell.value), cell.seed,
                        cell.report.bob_drop_rate, cell.report.eve_drop_rate,
                        cell.report.e_th_used});
    }
    cpm::write_summary_csv(dir / "sweep.csv", rows);
    cpm::write_sweep_aggregate_csv(dir / "sweep_aggregate.csv", result.aggregates);
    write_json(dir / "effective_config.json", cpm::effective_config_json(config));

    json m = manifest_base("sweep", config);
    m["outputs"] = {"sweep.csv", "sweep_aggregate.csv", "effective_config.json",
                    "manifest.json"};
    write_json(dir / "manifest.json", m);
    verify_outputs(dir, {"sweep.csv", "sweep_aggregate.csv", "effective_config.json",
                         "manifest.json"});

    std::printf("axis_value  mean_bob  std_bob  mean_eve  std_eve\n");
    for (const auto& agg : result.aggregates) {
        std::printf("%10g  %8.4f  %7.4f  %8.4f  %7.4f\n", agg.value, agg.mean_bob,
                    agg.std_bob, agg.mean_eve, agg.std_eve);
    }
    std::printf("outputs: %s\n", dir.string().c_str());
    return 0;
}

int cmd_table() {
    for (const auto& line : cpm::render_mic_table()) {
        std::printf("%s\n", line.c_str());
    }
    return 0;
}

int cmd_demo(const CommonArgs& args) {
    auto base = load_config(args);
    if (base.attack.type == cpm::AttackSchedule::Type::none) {
        base.attack.type = cpm::AttackSchedule::Type::interleaved;
        base.attack.eve_fraction = 0.5;
    }
    const auto dir = ensure_out_dir(args);

    // Threshold from the separated-locations reference set, reused for both
    // setups.
    cpm::ScenarioConfig cal_cfg = base;
    cal_cfg.geometry.d_be_m = 0.10;
    cal_cfg.detector.mode = cpm::DetectorConfig::Mode::calibrate_first;
    const auto cal = cpm::run_calibration(cal_cfg);
    const double e_th =
        cpm::threshold_from_rule(cal.refset, base.detector.threshold_rule);

    auto run_setup = [&](double d_be) {
        cpm::ScenarioConfig cfg = base;
        cfg.geometry.d_be_m = d_be;
        cfg.detector.mode = cpm::DetectorConfig::Mode::fixed;
        cfg.detector.e_th = e_th;
        return cpm::run_scenario(cfg);
    };
    const auto colocated = run_setup(0.0);
    const auto separated = run_setup(0.10);

    cpm::write_reference_csv(dir / "reference_set.csv", cal.refset);
    cpm::write_packets_csv(dir / "packets_colocated.csv", colocated.records);
    cpm::write_packets_csv(dir / "packets_separated.csv", separated.records);
    cpm::write_summary_csv(
        dir / "summary.csv",
        {{"0", base.seed, colocated.bob_drop_rate, colocated.eve_drop_rate, e_th},
         {"0.1", base.seed, separated.bob_drop_rate, separated.eve_drop_rate, e_th}});
    write_json(dir / "effective_config.json", cpm::effective_config_json(base));

    json m = manifest_base("demo", base);
    m["e_th_used"] = e_th;
    m["calibration"] = {{"mean_e_ab", cal.mean_e_ab},
                        {"mean_e_ae", cal.mean_e_ae},
                        {"num_pairs", cal.refset.e_ab_ref.size()}};
    m["colocated"] = {{"bob_drop_rate", colocated.bob_drop_rate},
                      {"eve_drop_rate", colocated.eve_drop_rate}};
    m["separated"] = {{"bob_drop_rate", separated.bob_drop_rate},
                      {"eve_drop_rate", separated.eve_drop_rate}};
    m["outputs"] = {"reference_set.csv", "packets_colocated.csv",
                    "packets_separated.csv", "summary.csv", "effective_config.json",
                    "manifest.json"};
    write_json(dir / "manifest.json", m);
    verify_outputs(dir, {"reference_set.csv", "packets_colocated.csv",
                         "packets_separated.csv", "summary.csv",
                         "effective_config.json", "manifest.json"});

    std::printf("threshold e_th = %.6g (from separated reference set)\n", e_th);
    std::printf("co-located (d_be = 0):    bob_drop_rate = %.2f%%  eve_drop_rate = %.2f%%\n",
                100.0 * colocated.bob_drop_rate, 100.0 * colocated.eve_drop_rate);
    std::printf("separated  (d_be = 10cm): bob_drop_rate = %.2f%%  eve_drop_rate = %.2f%%\n",
                100.0 * separated.bob_drop_rate, 100.0 * separated.eve_drop_rate);
    std::printf("outputs: %s\n", dir.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"channel profile monitoring simulator"};
    app.fallthrough();
    app.require_subcommand(1);

    CommonArgs args;
    app.add_option("--config", args.config_path, "scenario config file (JSON)");
    app.add_option("--out", args.out_dir, "output directory")->capture_default_str();
    app.add_option("--set", args.overrides,
                   "config override key=value (repeatable, dotted paths)");
    app.add_option("--seed", args.seed, "override the scenario seed");

    auto* run = app.add_subcommand("run", "run one scenario and write CSV traces");
    auto* calibrate =
        app.add_subcommand("calibrate", "produce a reference set and threshold");
    auto* sweep = app.add_subcommand("sweep", "run the sweep described in the config");
    auto* table = app.add_subcommand("table", "print the MIC overhead table");
    auto* demo =
        app.add_subcommand("demo", "run the co-located and separated setups");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(args);
        if (calibrate->parsed()) return cmd_calibrate(args);
        if (sweep->parsed()) return cmd_sweep(args);
        if (table->parsed()) return cmd_table();
        if (demo->parsed()) return cmd_demo(args);
    } catch (const cpm::ConfigError& ex) {
        std::fprintf(stderr, "config error: %s\n", ex.what());
        return 1;
    } catch (const std::invalid_argument& ex) {
        std::fprintf(stderr, "config error: %s\n", ex.what());
        return 1;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 2;
    }
    return 0;
}
