#pragma once

#include "dyngrasp/episode.hpp"

#include <filesystem>
#include <string>

namespace dyngrasp {

/// JSON configuration. Every key is optional and overrides the matching
/// default; unknown keys are rejected so typos surface as errors. Angles are
/// given in degrees under keys ending in "_deg".
EpisodeConfig config_from_json(const std::string& text, const EpisodeConfig& defaults = {});

/// Reads a JSON config file; throws std::runtime_error naming the path when it
/// cannot be read or parsed, std::invalid_argument for bad values.
EpisodeConfig load_config(const std::filesystem::path& path, const EpisodeConfig& defaults = {});

/// Full configuration tree, suitable as a starting point for a config file.
std::string config_to_json(const EpisodeConfig& config);

}  // namespace dyngrasp
