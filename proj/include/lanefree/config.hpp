#pragma once

#include <string>

#include "lanefree/experiment.hpp"
#include "lanefree/mlp.hpp"

namespace lanefree {

/// All tunables in one document: environment, reward/field, search,
/// guided-search, and training parameters, plus the experiment grid.
struct AppConfig {
    ExperimentPlan plan;
    TrainConfig train;
};

/// Parses a JSON config document; unknown keys are rejected. Every
/// field is optional and falls back to the built-in defaults.
AppConfig load_config(const std::string& path);
AppConfig parse_config(const std::string& json_text);
std::string default_config_json();

}  // namespace lanefree
