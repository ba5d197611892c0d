#pragma once

#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "mpsched/model.hpp"

namespace mpsched {

/// Parses a rate such as "36 Mb/s", "36Mbps", "36000000 b/s" or "36e6".
/// Bare numbers are bits per second. Returns bits per second.
double parse_rate(std::string_view text);

/// Builds a config from its JSON form and validates it. Throws ConfigError
/// with one issue per offending field.
SystemConfig config_from_json(const nlohmann::json& doc);

nlohmann::json config_to_json(const SystemConfig& config);

SystemConfig load_config(const std::filesystem::path& path);

}  // namespace mpsched
