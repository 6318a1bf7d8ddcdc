#pragma once

#include "samedge/harness.hpp"

#include <string>
#include <vector>

namespace samedge {

/// All recognized config keys in section.key form ("seed" is top-level).
/// The CLI exposes each as a --section.key flag.
std::vector<std::string> config_keys();

/// Parses flat INI text: [objective] [optim] [spectral] [data] [log]
/// sections plus a top-level `seed` key. Unknown sections or keys are
/// errors; [optim].eta is required.
ExperimentConfig parse_config_text(const std::string& text);

/// Reads and parses a config file.
ExperimentConfig load_config(const std::string& path);

/// Sets one key ("optim.eta", "seed", ...) from its text value. Used for
/// --section.key command-line overrides, applied after file values.
void apply_override(ExperimentConfig& config, const std::string& key, const std::string& value);

}  // namespace samedge
