#include "dyngrasp/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dyngrasp {

namespace {

EpisodeConfig with_motion(const EpisodeConfig& base, MotionKind kind, double speed_min, double speed_max,
                          double disrupt_prob = 1.0) {
  EpisodeConfig c = base;
  c.motion.kind = kind;
  c.motion.speed_min = speed_min;
  c.motion.speed_max = speed_max;
  c.motion.disrupt_prob = disrupt_prob;
  return c;
}

std::string speed_label(double speed) {
  std::ostringstream s;
  s << std::lround(speed * 100.0) << "cm/s";
  return s.str();
}

class SeedCounter {
 public:
  explicit SeedCounter(std::uint64_t master) : next_(master) {}
  std::uint64_t next() { return next_++; }

 private:
  std::uint64_t next_;
};

EpisodeBatch uniform_batch(const std::string& label, const EpisodeConfig& cfg, int n, SeedCounter& seeds) {
  EpisodeBatch b;
  b.label = label;
  for (int i = 0; i < n; ++i) {
    b.configs.push_back(cfg);
    b.seeds.push_back(seeds.next());
  }
  return b;
}

}  // namespace

std::vector<int> proportional_split(int n, const std::vector<int>& weights) {
  const long total = std::accumulate(weights.begin(), weights.end(), 0L);
  if (n < 0 || total <= 0) throw std::invalid_argument("proportional_split: invalid arguments");
  std::vector<int> parts(weights.size());
  std::vector<long> rem(weights.size());
  long assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    parts[i] = static_cast<int>(static_cast<long>(n) * weights[i] / total);
    rem[i] = static_cast<long>(n) * weights[i] % total;
    assigned += parts[i];
  }
  for (long left = n - assigned; left > 0; --left) {
    const auto best = static_cast<std::size_t>(std::max_element(rem.begin(), rem.end()) - rem.begin());
    ++parts[best];
    rem[best] = -1;
  }
  return parts;
}

std::string variant_label(const std::string& label, const EpisodeConfig& base) {
  std::string v = label;
  if (!base.ekf_enabled) v += "|no-ekf";
  if (base.stage != kNumStages - 1) v += "|stage" + std::to_string(base.stage);
  return v;
}

std::vector<EpisodeBatch> scenario_batches(const std::string& name, int n, std::uint64_t master_seed,
                                           const EpisodeConfig& base) {
  if (n < 1) throw std::invalid_argument("scenario '" + name + "': episode count must be >= 1");
  SeedCounter seeds(master_seed);
  std::vector<EpisodeBatch> batches;
  EpisodeConfig cfg = base;

  if (name == "speed_sweep") {
    cfg.workspace = WorkspaceId::Base;
    for (double v : kSweepSpeeds) {
      const MotionKind kind = v > 0.05 + 1e-12 ? MotionKind::LinearFast : MotionKind::LinearRegular;
      batches.push_back(uniform_batch(speed_label(v), with_motion(cfg, kind, v, v), n, seeds));
    }
    batches.push_back(uniform_batch("0-15cm/s", with_motion(cfg, MotionKind::LinearFast, 0.0, 0.15), n, seeds));
  } else if (name == "time_limits") {
    cfg.workspace = WorkspaceId::Base;
    const auto split = proportional_split(n, {7, 3});
    EpisodeBatch b;
    b.label = "mix";
    for (int i = 0; i < n; ++i) {
      b.configs.push_back(i < split[0] ? with_motion(cfg, MotionKind::LinearRegular, 0.0, 0.05)
                                       : with_motion(cfg, MotionKind::Random, 0.0, 0.05));
      b.seeds.push_back(seeds.next());
    }
    batches.push_back(std::move(b));
  } else if (name == "workspace") {
    for (auto id : {WorkspaceId::FlankA, WorkspaceId::FlankB, WorkspaceId::Base, WorkspaceId::Extended}) {
      cfg.workspace = id;
      batches.push_back(uniform_batch(to_string(id), with_motion(cfg, MotionKind::LinearRegular, 0.0, 0.05), n, seeds));
    }
  } else if (name == "tracking_loss") {
    cfg.workspace = WorkspaceId::Base;
    const auto split = proportional_split(n, {7, 3, 5});
    batches.push_back(uniform_batch("linear", with_motion(cfg, MotionKind::LinearRegular, 0.0, 0.05), split[0], seeds));
    batches.push_back(uniform_batch("random", with_motion(cfg, MotionKind::Random, 0.0, 0.05), split[1], seeds));
    batches.push_back(
        uniform_batch("disruptive", with_motion(cfg, MotionKind::Disruptive, 0.0, 0.05), split[2], seeds));
  } else if (name == "ablation") {
    cfg.workspace = WorkspaceId::Extended;
    const auto split = proportional_split(n, {7, 3});
    EpisodeBatch b;
    b.label = "combined";
    for (int i = 0; i < n; ++i) {
      b.configs.push_back(i < split[0] ? with_motion(cfg, MotionKind::Disruptive, 0.0, 0.15, 0.3)
                                       : with_motion(cfg, MotionKind::Random, 0.0, 0.05));
      b.seeds.push_back(seeds.next());
    }
    batches.push_back(std::move(b));
  } else {
    throw std::invalid_argument("unknown scenario '" + name + "'");
  }
  return batches;
}

std::vector<std::vector<EpisodeResult>> run_batches(const std::vector<EpisodeBatch>& batches, int workers) {
  struct Job {
    std::size_t batch;
    std::size_t index;
  };
  std::vector<Job> jobs;
  std::vector<std::vector<EpisodeResult>> results(batches.size());
  for (std::size_t b = 0; b < batches.size(); ++b) {
    if (batches[b].configs.size() != batches[b].seeds.size()) {
      throw std::invalid_argument("run_batches: config and seed counts differ in batch '" + batches[b].label + "'");
    }
    for (const auto& c : batches[b].configs) c.validate();
    results[b].resize(batches[b].configs.size());
    for (std::size_t i = 0; i < batches[b].configs.size(); ++i) jobs.push_back({b, i});
  }

  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        const Job& job = jobs[j];
        results[job.batch][job.index] =
            run_episode(batches[job.batch].configs[job.index], batches[job.batch].seeds[job.index]);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  return results;
}

MetricsTable run_scenario(const std::string& name, int n_episodes, std::uint64_t master_seed,
                          const ScenarioOptions& options) {
  EpisodeConfig base = options.base;
  if (options.trace_dir) base.record_trace = true;
  const auto batches = scenario_batches(name, n_episodes, master_seed, base);
  const auto results = run_batches(batches, options.workers);

  if (options.trace_dir) {
    std::filesystem::create_directories(*options.trace_dir);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      for (std::size_t i = 0; i < results[b].size(); ++i) {
        const auto path = *options.trace_dir / (name + "-" + std::to_string(b) + "-" + std::to_string(i) + "-seed" +
                                                std::to_string(results[b][i].seed) + ".jsonl");
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open trace file '" + path.string() + "'");
        write_trace(results[b][i], out);
        if (!out) throw std::runtime_error("failed writing trace file '" + path.string() + "'");
      }
    }
  }

  MetricsTable table;
  if (name == "time_limits") {
    for (double cutoff : kTimeCutoffs) {
      std::ostringstream label;
      label << "t<=" << cutoff << "s";
      table.rows.push_back(aggregate(name, variant_label(label.str(), base), results[0], cutoff));
    }
    return table;
  }
  std::vector<EpisodeResult> all;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    table.rows.push_back(aggregate(name, variant_label(batches[b].label, base), results[b]));
    all.insert(all.end(), results[b].begin(), results[b].end());
  }
  if (name == "tracking_loss") table.rows.push_back(aggregate(name, variant_label("overall", base), all));
  return table;
}

}  // namespace dyngrasp
