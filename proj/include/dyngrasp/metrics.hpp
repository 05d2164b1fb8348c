#pragma once

#include "dyngrasp/episode.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dyngrasp {

/// One table row. Percentages are kept as integer hundredths of a percent so
/// that rows sum to exactly 100.00 and the total-failure column is exactly the
/// sum of its parts.
struct MetricsRow {
  std::string scenario;
  std::string variant;
  int episodes = 0;
  std::int64_t success = 0;
  std::int64_t timeout = 0;
  std::int64_t collision = 0;
  std::int64_t tracking_failure = 0;
  std::optional<std::int64_t> mean_time_to_grasp;  // hundredths of a second; empty without successes

  std::int64_t total_failure() const { return timeout + collision + tracking_failure; }
  static double pct(std::int64_t hundredths) { return static_cast<double>(hundredths) / 100.0; }

  bool operator==(const MetricsRow&) const = default;
};

struct MetricsTable {
  std::vector<MetricsRow> rows;
  bool operator==(const MetricsTable&) const = default;
};

/// Outcome counts -> row. Percentages use largest-remainder rounding to
/// hundredths, ties going to the earlier column.
MetricsRow make_row(const std::string& scenario, const std::string& variant, int success, int timeout, int collision,
                    int tracking_failure, std::optional<double> mean_time_to_grasp);

/// Aggregates episodes; with `cutoff`, successes after the cutoff and any
/// episode still running at the cutoff count as timeouts.
MetricsRow aggregate(const std::string& scenario, const std::string& variant, const std::vector<EpisodeResult>& results,
                     std::optional<double> cutoff = std::nullopt);

enum class OutputFormat { Csv, Json };
OutputFormat output_format_from_string(const std::string& name);

inline constexpr const char* kCsvHeader =
    "scenario,variant,episodes,success_pct,timeout_pct,collision_pct,tracking_failure_pct,total_failure_pct,"
    "mean_time_to_grasp_s";

void write_csv(const MetricsTable& table, std::ostream& out);
void write_json(const MetricsTable& table, std::ostream& out);
MetricsTable read_csv(std::istream& in);
MetricsTable read_json(std::istream& in);

/// Writes the table to `path`; throws std::runtime_error naming the path on
/// I/O failure.
void emit_results(const MetricsTable& table, OutputFormat format, const std::filesystem::path& path);

/// One JSON object per tick.
void write_trace(const EpisodeResult& result, std::ostream& out);

}  // namespace dyngrasp
