#pragma once

#include "dyngrasp/episode.hpp"
#include "dyngrasp/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dyngrasp {

inline const std::vector<std::string> kScenarioNames{"speed_sweep", "time_limits", "workspace", "tracking_loss",
                                                     "ablation"};

struct ScenarioOptions {
  EpisodeConfig base;  // ekf_enabled and stage select the variant
  int workers = 0;     // 0: hardware concurrency
  std::optional<std::filesystem::path> trace_dir;
};

/// One labelled group of episodes inside a scenario.
struct EpisodeBatch {
  std::string label;
  std::vector<EpisodeConfig> configs;
  std::vector<std::uint64_t> seeds;
};

/// Runs every episode of every batch, fanning out over `workers` threads.
/// Results come back in batch/episode order whatever the thread count.
std::vector<std::vector<EpisodeResult>> run_batches(const std::vector<EpisodeBatch>& batches, int workers);

/// Episode batches of a named scenario: seeds are master_seed + global episode
/// index. Throws std::invalid_argument for unknown names or n_episodes < 1.
std::vector<EpisodeBatch> scenario_batches(const std::string& name, int n_episodes, std::uint64_t master_seed,
                                           const EpisodeConfig& base);

/// Splits n into parts proportional to `weights` (largest remainder, ties to
/// the earlier part).
std::vector<int> proportional_split(int n, const std::vector<int>& weights);

std::string variant_label(const std::string& label, const EpisodeConfig& base);

MetricsTable run_scenario(const std::string& name, int n_episodes, std::uint64_t master_seed,
                          const ScenarioOptions& options = {});

inline const std::vector<double> kTimeCutoffs{35.0, 30.0, 25.0, 20.0, 15.0, 10.0, 5.0};
inline const std::vector<double> kSweepSpeeds{0.03, 0.06, 0.09, 0.12, 0.15};

}  // namespace dyngrasp
