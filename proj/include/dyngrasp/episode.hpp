#pragma once

#include "dyngrasp/control.hpp"
#include "dyngrasp/ekf.hpp"
#include "dyngrasp/grasp.hpp"
#include "dyngrasp/perception.hpp"
#include "dyngrasp/reward.hpp"
#include "dyngrasp/world.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dyngrasp {

enum class SceneKind { Regular, Complex };
std::string to_string(SceneKind kind);
SceneKind scene_kind_from_string(const std::string& name);

/// Diagonal filter noise and initial covariance, one variance per block.
struct FilterNoiseConfig {
  double q_pos = 1e-6;
  double q_vel = 2.5e-5;
  double q_quat = 1e-8;
  double q_omega = 2.5e-5;
  double r_pos = 2.5e-5;
  double r_quat = 1e-4;
  double p0 = 1e-4;

  NoiseConfig noise() const;
  StateVector p0_diag() const { return StateVector::Constant(p0); }
};

struct GraspFlowConfig {
  GraspTolerances tolerances;
  double slip_prob = 0.0;
  int max_retries = 3;
  int stabilization_ticks = 6;
  double lift_height = 0.10;
  double lift_speed = 0.10;
  double backoff = 0.05;  // m along the approach axis after a failed closure
  double closed_threshold = 0.01;
};

struct TrackingFailureConfig {
  double distance = 0.25;  // m between the belief (filter mean or frozen estimate) and truth
  double duration = 2.0;   // s the distance must be exceeded
};

struct EpisodeConfig {
  WorkspaceId workspace = WorkspaceId::Base;
  MotionPattern motion;
  double t_max = 35.0;
  double dt = 0.05;
  bool ekf_enabled = true;
  // Re-registration is seeded by the filter mean; without the filter the
  // tracker stays lost once lock breaks unless this is set.
  bool baseline_reregistration = false;
  int stage = kNumStages - 1;  // reward logging only
  SceneKind scene = SceneKind::Regular;

  // Time spent on initial registration and grasp synthesis before the arm
  // moves; the object keeps moving and is tracked meanwhile.
  double startup_delay = 1.0;
  double recovery_replan_period = 0.5;  // s between recovery viewpoint re-plans

  InitialPoseConfig initial_pose;
  Vec3 object_extent{0.05, 0.05, 0.05};
  Pose gripper_home = default_gripper_home();
  CameraModel camera;
  SensorNoise sensor;
  FilterNoiseConfig filter;
  LossHandling loss;
  RecoveryConfig recovery;
  GraspPoolConfig pool;
  SelectionWeights selection;
  ControlGains gains;
  GripperLimits gripper;
  CollisionConfig collision;
  GraspFlowConfig grasp;
  TrackingFailureConfig tracking_failure;
  RewardWeights reward;
  StageTable stages = default_stage_table();
  bool record_trace = false;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
  int max_ticks() const;
};

enum class Outcome { Success, Timeout, Collision, TrackingFailure };
std::string to_string(Outcome outcome);

struct TraceRecord {
  int tick = 0;
  double time = 0.0;
  Pose object;
  Pose estimate;  // controller-facing
  Pose belief;    // filter mean, or the frozen estimate without the filter
  Pose gripper;
  double gripper_width = 0.0;
  TrackerMode mode = TrackerMode::Locked;
  Phase phase = Phase::Standoff;
  double reward = 0.0;
};

struct EpisodeResult {
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::Timeout;
  std::optional<double> time_to_grasp;  // Success only
  double end_time = 0.0;
  int retries = 0;
  int attempts = 0;
  int loss_ticks = 0;
  int premature_grasps = 0;  // closures triggered while the tracker was not locked
  int reregistrations = 0;
  double reward_total = 0.0;
  double max_tracking_error = 0.0;
  std::vector<TraceRecord> trace;
};

/// Terminal-state summary used to label an episode.
struct TerminalFlags {
  bool collided = false;
  bool tracking_failed = false;
  bool lifted = false;
  bool timed_out = false;
};

/// Collision > TrackingFailure > Success > Timeout.
Outcome classify_outcome(const TerminalFlags& flags);

/// Tracks how long the estimate has been further than the threshold from the
/// truth; `failed()` once the excursion lasts longer than the duration.
class TrackingFailureMonitor {
 public:
  explicit TrackingFailureMonitor(TrackingFailureConfig cfg = {}) : cfg_(cfg) {}
  void update(double error, double dt);
  bool failed() const { return over_time_ > cfg_.duration + 1e-9; }
  double excursion_time() const { return over_time_; }

 private:
  TrackingFailureConfig cfg_;
  double over_time_ = 0.0;
};

EpisodeResult run_episode(const EpisodeConfig& config, std::uint64_t seed);

}  // namespace dyngrasp
