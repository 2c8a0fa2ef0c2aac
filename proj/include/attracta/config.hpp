#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "attracta/model_zoo.hpp"

namespace attracta {

struct LoadedConfig {
    nlohmann::json raw;
    ModelBuild build;
    std::optional<HistoryFunction> history;
    /// FNV-1a over the canonical (key-sorted, compact) dump of `raw`.
    std::string hash;
};

/// Reads and builds a system description. Throws InvalidConfig for syntax
/// and schema problems; builder errors propagate as they are.
LoadedConfig load_config(const std::filesystem::path& path);

/// As load_config; `delay` replaces the file's delay structure with a
/// template applied per the model's structure.
LoadedConfig load_config_json(const nlohmann::json& j,
                              const std::optional<DelayDistribution>& delay = std::nullopt);

DelayDistribution parse_distribution(const nlohmann::json& j);
Lag parse_lag(const nlohmann::json& j);
Rate parse_rate(const nlohmann::json& j);

std::string config_hash(const nlohmann::json& j);

}  // namespace attracta
