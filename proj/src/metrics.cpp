#include "dyngrasp/metrics.hpp"

#include "json.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dyngrasp {

using nlohmann::json;

MetricsRow make_row(const std::string& scenario, const std::string& variant, int success, int timeout, int collision,
                    int tracking_failure, std::optional<double> mean_time_to_grasp) {
  MetricsRow row;
  row.scenario = scenario;
  row.variant = variant;
  const std::array<std::int64_t, 4> counts{success, timeout, collision, tracking_failure};
  for (auto c : counts) {
    if (c < 0) throw std::invalid_argument("make_row: negative outcome count");
  }
  const std::int64_t n = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  row.episodes = static_cast<int>(n);

  std::array<std::int64_t, 4> share{};
  if (n > 0) {
    std::array<std::int64_t, 4> rem{};
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      share[i] = counts[i] * 10000 / n;
      rem[i] = counts[i] * 10000 % n;
      assigned += share[i];
    }
    for (std::int64_t left = 10000 - assigned; left > 0; --left) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < 4; ++i) {
        if (rem[i] > rem[best]) best = i;
      }
      ++share[best];
      rem[best] = -1;
    }
  }
  row.success = share[0];
  row.timeout = share[1];
  row.collision = share[2];
  row.tracking_failure = share[3];
  if (mean_time_to_grasp) row.mean_time_to_grasp = std::llround(*mean_time_to_grasp * 100.0);
  return row;
}

MetricsRow aggregate(const std::string& scenario, const std::string& variant, const std::vector<EpisodeResult>& results,
                     std::optional<double> cutoff) {
  int success = 0, timeout = 0, collision = 0, tracking = 0;
  double time_sum = 0.0;
  const double eps = 1e-9;
  for (const auto& r : results) {
    Outcome o = r.outcome;
    if (cutoff) {
      const bool success_in_time = o == Outcome::Success && r.time_to_grasp && *r.time_to_grasp <= *cutoff + eps;
      if (!success_in_time && r.end_time > *cutoff + eps) o = Outcome::Timeout;
    }
    switch (o) {
      case Outcome::Success:
        ++success;
        time_sum += r.time_to_grasp.value_or(r.end_time);
        break;
      case Outcome::Timeout: ++timeout; break;
      case Outcome::Collision: ++collision; break;
      case Outcome::TrackingFailure: ++tracking; break;
    }
  }
  std::optional<double> mean_time;
  if (success > 0) mean_time = time_sum / success;
  return make_row(scenario, variant, success, timeout, collision, tracking, mean_time);
}

OutputFormat output_format_from_string(const std::string& name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw std::invalid_argument("unknown output format '" + name + "' (expected csv or json)");
}

namespace {

std::string hundredths_to_string(std::int64_t h) {
  std::ostringstream s;
  s << h / 100 << '.' << (h % 100 < 10 ? "0" : "") << h % 100;
  return s.str();
}

std::int64_t parse_hundredths(const std::string& text) {
  std::size_t used = 0;
  const double v = std::stod(text, &used);
  if (used != text.size()) throw std::invalid_argument("malformed number '" + text + "'");
  return std::llround(v * 100.0);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream s(line);
  while (std::getline(s, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

json pose_json(const Pose& p) {
  const auto& q = p.orientation.coeffs();
  return {{"p", {p.position.x(), p.position.y(), p.position.z()}}, {"q", {q.x(), q.y(), q.z(), q.w()}}};
}

}  // namespace

void write_csv(const MetricsTable& table, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : table.rows) {
    out << r.scenario << ',' << r.variant << ',' << r.episodes << ',' << hundredths_to_string(r.success) << ','
        << hundredths_to_string(r.timeout) << ',' << hundredths_to_string(r.collision) << ','
        << hundredths_to_string(r.tracking_failure) << ',' << hundredths_to_string(r.total_failure()) << ','
        << (r.mean_time_to_grasp ? hundredths_to_string(*r.mean_time_to_grasp) : "nan") << '\n';
  }
}

MetricsTable read_csv(std::istream& in) {
  MetricsTable table;
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("results CSV: missing or wrong header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw std::runtime_error("results CSV: expected 9 fields in '" + line + "'");
    MetricsRow r;
    r.scenario = f[0];
    r.variant = f[1];
    r.episodes = std::stoi(f[2]);
    r.success = parse_hundredths(f[3]);
    r.timeout = parse_hundredths(f[4]);
    r.collision = parse_hundredths(f[5]);
    r.tracking_failure = parse_hundredths(f[6]);
    if (parse_hundredths(f[7]) != r.total_failure()) {
      throw std::runtime_error("results CSV: total_failure_pct is not the sum of its parts in '" + line + "'");
    }
    if (f[8] != "nan") r.mean_time_to_grasp = parse_hundredths(f[8]);
    table.rows.push_back(r);
  }
  return table;
}

void write_json(const MetricsTable& table, std::ostream& out) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    json j;
    j["scenario"] = r.scenario;
    j["variant"] = r.variant;
    j["episodes"] = r.episodes;
    j["success_pct"] = MetricsRow::pct(r.success);
    j["timeout_pct"] = MetricsRow::pct(r.timeout);
    j["collision_pct"] = MetricsRow::pct(r.collision);
    j["tracking_failure_pct"] = MetricsRow::pct(r.tracking_failure);
    j["total_failure_pct"] = MetricsRow::pct(r.total_failure());
    j["mean_time_to_grasp_s"] = r.mean_time_to_grasp ? json(MetricsRow::pct(*r.mean_time_to_grasp)) : json(nullptr);
    rows.push_back(std::move(j));
  }
  out << rows.dump(2) << '\n';
}

MetricsTable read_json(std::istream& in) {
  const json rows = json::parse(in);
  MetricsTable table;
  for (const auto& j : rows) {
    MetricsRow r;
    r.scenario = j.at("scenario").get<std::string>();
    r.variant = j.at("variant").get<std::string>();
    r.episodes = j.at("episodes").get<int>();
    r.success = std::llround(j.at("success_pct").get<double>() * 100.0);
    r.timeout = std::llround(j.at("timeout_pct").get<double>() * 100.0);
    r.collision = std::llround(j.at("collision_pct").get<double>() * 100.0);
    r.tracking_failure = std::llround(j.at("tracking_failure_pct").get<double>() * 100.0);
    const auto& t = j.at("mean_time_to_grasp_s");
    if (!t.is_null()) r.mean_time_to_grasp = std::llround(t.get<double>() * 100.0);
    table.rows.push_back(r);
  }
  return table;
}

void emit_results(const MetricsTable& table, OutputFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  if (format == OutputFormat::Csv) {
    write_csv(table, out);
  } else {
    write_json(table, out);
  }
  out.flush();
  if (!out) throw std::runtime_error("failed writing results to '" + path.string() + "'");
}

void write_trace(const EpisodeResult& result, std::ostream& out) {
  for (const auto& r : result.trace) {
    json j;
    j["tick"] = r.tick;
    j["t"] = r.time;
    j["object"] = pose_json(r.object);
    j["estimate"] = pose_json(r.estimate);
    j["belief"] = pose_json(r.belief);
    j["gripper"] = pose_json(r.gripper);
    j["width"] = r.gripper_width;
    j["mode"] = to_string(r.mode);
    j["phase"] = to_string(r.phase);
    j["reward"] = r.reward;
    out << j.dump() << '\n';
  }
}

}  // namespace dyngrasp
