// SPDX-License-Identifier: Apache-2.0

#include "cpm/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace cpm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& known) {
    for (const auto& item : obj.items()) {
        if (!known.count(item.key())) {
            fail(path.empty() ? item.key() : path + "." + item.key(),
                 "unknown key");
        }
    }
}

std::string join(const std::string& path, const char* key) {
    return path.empty() ? key : path + "." + key;
}

double get_number(const json& obj, const std::string& path, const char* key,
                  double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) fail(join(path, key), "must be a number");
    return v.get<double>();
}

std::uint64_t get_count(const json& obj, const std::string& path, const char* key,
                        std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned()) fail(join(path, key), "must be a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) fail(join(path, key), "must be a string");
    return v.get<std::string>();
}

SpatialGeometry parse_geometry(const json& obj) {
    check_keys(obj, "geometry", {"d_ab_m", "d_ae_m", "d_be_m", "carrier_freq_hz"});
    SpatialGeometry g;
    g.d_ab_m = get_number(obj, "geometry", "d_ab_m", g.d_ab_m);
    g.d_ae_m = get_number(obj, "geometry", "d_ae_m", g.d_ae_m);
    g.d_be_m = get_number(obj, "geometry", "d_be_m", g.d_be_m);
    g.carrier_freq_hz = get_number(obj, "geometry", "carrier_freq_hz", g.carrier_freq_hz);
    return g;
}

OfdmNumerology parse_numerology(const json& obj) {
    check_keys(obj, "numerology",
               {"fft_size", "data_subcarriers", "cp_len", "sample_rate_hz",
                "data_symbols_per_frame", "carrier_freq_hz"});
    OfdmNumerology n;
    n.fft_size = get_count(obj, "numerology", "fft_size", n.fft_size);
    n.data_subcarriers =
        get_count(obj, "numerology", "data_subcarriers", n.data_subcarriers);
    n.cp_len = get_count(obj, "numerology", "cp_len", n.cp_len);
    n.sample_rate_hz = get_number(obj, "numerology", "sample_rate_hz", n.sample_rate_hz);
    n.data_symbols_per_frame = get_count(obj, "numerology", "data_symbols_per_frame",
                                         n.data_symbols_per_frame);
    n.carrier_freq_hz = get_number(obj, "numerology", "carrier_freq_hz", n.carrier_freq_hz);
    return n;
}

ChannelParams parse_channel(const json& obj) {
    check_keys(obj, "channel", {"num_taps", "pdp_floor_db"});
    ChannelParams c;
    c.num_taps = get_count(obj, "channel", "num_taps", c.num_taps);
    c.pdp_floor_db = get_number(obj, "channel", "pdp_floor_db", c.pdp_floor_db);
    return c;
}

AttackSchedule parse_attack(const json& obj) {
    check_keys(obj, "attack",
               {"type", "eve_fraction", "start", "length", "delay_packets"});
    AttackSchedule a;
    const std::string type = get_string(obj, "attack", "type", "none");
    if (type == "none") {
        a.type = AttackSchedule::Type::none;
    } else if (type == "interleaved") {
        a.type = AttackSchedule::Type::interleaved;
    } else if (type == "burst") {
        a.type = AttackSchedule::Type::burst;
    } else if (type == "replay") {
        a.type = AttackSchedule::Type::replay;
    } else {
        fail("attack.type", "must be one of none|interleaved|burst|replay");
    }
    a.eve_fraction = get_number(obj, "attack", "eve_fraction", a.eve_fraction);
    a.start = get_count(obj, "attack", "start", a.start);
    a.length = get_count(obj, "attack", "length", a.length);
    a.delay_packets = get_count(obj, "attack", "delay_packets", a.delay_packets);
    return a;
}

DetectorConfig parse_detector(const json& obj) {
    check_keys(obj, "detector", {"mode", "e_th", "pcc_mode", "threshold_rule"});
    DetectorConfig d;
    std::string mode = get_string(obj, "detector", "mode", "");
    if (mode.empty()) {
        mode = obj.contains("e_th") ? "fixed" : "calibrate-first";
    }
    if (mode == "calibrate-first") {
        d.mode = DetectorConfig::Mode::calibrate_first;
        if (obj.contains("e_th")) {
            fail("detector.e_th", "not allowed with mode calibrate-first");
        }
    } else if (mode == "fixed") {
        d.mode = DetectorConfig::Mode::fixed;
        if (!obj.contains("e_th")) fail("detector.e_th", "required with mode fixed");
        d.e_th = get_number(obj, "detector", "e_th", 0.0);
    } else {
        fail("detector.mode", "must be calibrate-first or fixed");
    }
    const std::string pcc_mode = get_string(obj, "detector", "pcc_mode", "reim");
    if (pcc_mode == "reim") {
        d.pcc_mode = PccMode::reim;
    } else if (pcc_mode == "magnitude") {
        d.pcc_mode = PccMode::magnitude;
    } else {
        fail("detector.pcc_mode", "must be reim or magnitude");
    }
    const std::string rule = get_string(obj, "detector", "threshold_rule", "half-gap");
    if (rule == "half-gap") {
        d.threshold_rule = ThresholdRule::half_gap;
    } else if (rule == "midpoint") {
        d.threshold_rule = ThresholdRule::midpoint;
    } else {
        fail("detector.threshold_rule", "must be half-gap or midpoint");
    }
    return d;
}

SweepSpec parse_sweep(const json& obj, std::uint64_t default_seed) {
    check_keys(obj, "sweep", {"axis", "values", "seeds"});
    SweepSpec s;
    const std::string axis = get_string(obj, "sweep", "axis", "");
    if (axis == "d_be") {
        s.axis = SweepAxis::d_be;
    } else if (axis == "snr_db") {
        s.axis = SweepAxis::snr_db;
    } else if (axis == "temporal_rho") {
        s.axis = SweepAxis::temporal_rho;
    } else if (axis == "e_th") {
        s.axis = SweepAxis::e_th;
    } else {
        fail("sweep.axis", "must be one of d_be|snr_db|temporal_rho|e_th");
    }
    if (!obj.contains("values") || !obj.at("values").is_array()) {
        fail("sweep.values", "must be an array of numbers");
    }
    for (const auto& v : obj.at("values")) {
        if (!v.is_number()) fail("sweep.values", "must be an array of numbers");
        s.values.push_back(v.get<double>());
    }
    if (obj.contains("seeds")) {
        if (!obj.at("seeds").is_array()) {
            fail("sweep.seeds", "must be an array of non-negative integers");
        }
        for (const auto& v : obj.at("seeds")) {
            if (!v.is_number_unsigned()) {
                fail("sweep.seeds", "must be an array of non-negative integers");
            }
            s.seeds.push_back(v.get<std::uint64_t>());
        }
    } else {
        s.seeds.push_back(default_seed);
    }
    return s;
}

}  // namespace

ScenarioConfig parse_config_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    check_keys(doc, "",
               {"seed", "snr_db", "temporal_rho", "num_packets", "sync_threshold",
                "update_policy", "geometry", "numerology", "channel", "attack",
                "detector", "sweep"});
    ScenarioConfig cfg;
    cfg.seed = get_count(doc, "", "seed", cfg.seed);
    if (doc.contains("snr_db")) {
        const auto& v = doc.at("snr_db");
        if (v.is_string()) {
            const auto s = v.get<std::string>();
            if (s == "inf" || s == "+inf") {
                cfg.snr_db = std::numeric_limits<double>::infinity();
            } else {
                fail("snr_db", "must be a number or \"inf\"");
            }
        } else if (v.is_number()) {
            cfg.snr_db = v.get<double>();
        } else {
            fail("snr_db", "must be a number or \"inf\"");
        }
    }
    cfg.temporal_rho = get_number(doc, "", "temporal_rho", cfg.temporal_rho);
    cfg.num_packets = get_count(doc, "", "num_packets", cfg.num_packets);
    cfg.sync_threshold = get_number(doc, "", "sync_threshold", cfg.sync_threshold);
    const std::string policy = get_string(doc, "", "update_policy", "on-accept");
    if (policy == "on-accept") {
        cfg.update_policy = UpdatePolicy::on_accept;
    } else if (policy == "always") {
        cfg.update_policy = UpdatePolicy::always;
    } else {
        fail("update_policy", "must be on-accept or always");
    }
    if (doc.contains("geometry")) {
        if (!doc.at("geometry").is_object()) fail("geometry", "must be an object");
        cfg.geometry = parse_geometry(doc.at("geometry"));
    }
    if (doc.contains("numerology")) {
        if (!doc.at("numerology").is_object()) fail("numerology", "must be an object");
        cfg.numerology = parse_numerology(doc.at("numerology"));
    }
    if (doc.contains("channel")) {
        if (!doc.at("channel").is_object()) fail("channel", "must be an object");
        cfg.channel = parse_channel(doc.at("channel"));
    }
    if (doc.contains("attack")) {
        if (!doc.at("attack").is_object()) fail("attack", "must be an object");
        cfg.attack = parse_attack(doc.at("attack"));
    }
    if (doc.contains("detector")) {
        if (!doc.at("detector").is_object()) fail("detector", "must be an object");
        cfg.detector = parse_detector(doc.at("detector"));
    }
    if (doc.contains("sweep")) {
        if (!doc.at("sweep").is_object()) fail("sweep", "must be an object");
        cfg.sweep = parse_sweep(doc.at("sweep"), cfg.seed);
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
    }
    return cfg;
}

ScenarioConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& ex) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + ex.what());
    }
    return parse_config_json(doc);
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override must look like key=value: " + assignment);
    }
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    nlohmann::json value;
    try {
        value = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error&) {
        value = raw;  // unquoted strings like attack.type=burst
    }

    nlohmann::json* node = &doc;
    std::size_t begin = 0;
    while (true) {
        const auto dot = path.find('.', begin);
        const std::string key = path.substr(begin, dot - begin);
        if (key.empty()) throw ConfigError("override has an empty path segment: " + path);
        if (dot == std::string::npos) {
            (*node)[key] = value;
            break;
        }
        nlohmann::json& child = (*node)[key];
        if (!child.is_object()) {
            if (!child.is_null()) {
                throw ConfigError("override path crosses a non-object: " + path);
            }
            child = nlohmann::json::object();
        }
        node = &child;
        begin = dot + 1;
    }
}

nlohmann::json effective_config_json(const ScenarioConfig& config) {
    nlohmann::json doc;
    doc["seed"] = config.seed;
    if (std::isinf(config.snr_db)) {
        doc["snr_db"] = "inf";
    } else {
        doc["snr_db"] = config.snr_db;
    }
    doc["temporal_rho"] = config.temporal_rho;
    doc["num_packets"] = config.num_packets;
    doc["sync_threshold"] = config.sync_threshold;
    doc["update_policy"] =
        config.update_policy == UpdatePolicy::on_accept ? "on-accept" : "always";
    doc["geometry"] = {{"d_ab_m", config.geometry.d_ab_m},
                       {"d_ae_m", config.geometry.d_ae_m},
                       {"d_be_m", config.geometry.d_be_m},
                       {"carrier_freq_hz", config.geometry.carrier_freq_hz}};
    doc["numerology"] = {{"fft_size", config.numerology.fft_size},
                         {"data_subcarriers", config.numerology.data_subcarriers},
                         {"cp_len", config.numerology.cp_len},
                         {"sample_rate_hz", config.numerology.sample_rate_hz},
                         {"data_symbols_per_frame", config.numerology.data_symbols_per_frame},
                         {"carrier_freq_hz", config.numerology.carrier_freq_hz}};
    doc["channel"] = {{"num_taps", config.channel.num_taps},
                      {"pdp_floor_db", config.channel.pdp_floor_db}};
    nlohmann::json attack;
    switch (config.attack.type) {
        case AttackSchedule::Type::none:
            attack["type"] = "none";
            break;
        case AttackSchedule::Type::interleaved:
            attack["type"] = "interleaved";
            attack["eve_fraction"] = config.attack.eve_fraction;
            break;
        case AttackSchedule::Type::burst:
            attack["type"] = "burst";
            attack["start"] = config.attack.start;
            attack["length"] = config.attack.length;
            break;
        case AttackSchedule::Type::replay:
            attack["type"] = "replay";
            attack["delay_packets"] = config.attack.delay_packets;
            break;
    }
    doc["attack"] = attack;
    nlohmann::json detector;
    if (config.detector.mode == DetectorConfig::Mode::calibrate_first) {
        detector["mode"] = "calibrate-first";
    } else {
        detector["mode"] = "fixed";
        detector["e_th"] = config.detector.e_th;
    }
    detector["pcc_mode"] = config.detector.pcc_mode == PccMode::reim ? "reim" : "magnitude";
    detector["threshold_rule"] =
        config.detector.threshold_rule == ThresholdRule::half_gap ? "half-gap" : "midpoint";
    doc["detector"] = detector;
    if (config.sweep) {
        nlohmann::json sweep;
        switch (config.sweep->axis) {
            case SweepAxis::d_be: sweep["axis"] = "d_be"; break;
            case SweepAxis::snr_db: sweep["axis"] = "snr_db"; break;
            case SweepAxis::temporal_rho: sweep["axis"] = "temporal_rho"; break;
            case SweepAxis::e_th: sweep["axis"] = "e_th"; break;
        }
        sweep["values"] = config.sweep->values;
        sweep["seeds"] = config.sweep->seeds;
        doc["sweep"] = sweep;
    }
    return doc;
}

}  // namespace cpm
