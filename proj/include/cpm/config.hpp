// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cpm/harness.hpp"

namespace cpm {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Parse a scenario from JSON. Unknown keys are errors; violations report
/// the offending field. snr_db additionally accepts the string "inf" for
/// noiseless runs.
ScenarioConfig parse_config_json(const nlohmann::json& doc);

/// Load and parse a JSON config file.
ScenarioConfig parse_config_file(const std::filesystem::path& path);

/// Apply one "dotted.path=value" override onto a JSON document. The value
/// is parsed as JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Full echo of the effective configuration (defaults filled in). Parsing
/// the echo yields the same config.
nlohmann::json effective_config_json(const ScenarioConfig& config);

}  // namespace cpm
