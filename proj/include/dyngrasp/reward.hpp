#pragma once

#include <array>

namespace dyngrasp {

/// Base magnitudes of the shaped reward terms. Penalties are stored with their
/// sign.
struct RewardWeights {
  double grasp = 180.0;
  double dist = -1.0;        // per meter of mean keypoint distance
  double dist_over = -0.25;  // when the mean keypoint distance exceeds 0.25 m
  double align = -0.015;     // per radian of misalignment
  double collision = -1.5;
  double view = -1.5;     // per out-of-view tick
  double gripper = -0.3;  // per premature closure
  double move = -0.005;   // per unit of action magnitude
};

inline constexpr int kNumStages = 6;

struct StageCoefficients {
  int stage = 0;
  double dist = 1.0;
  double dist_over = 1.0;
  double align = 1.0;
  double collision = 1.0;
  double view = 1.0;
  double gripper = 1.0;
  double move = 1.0;
  bool strict_view_reset = false;
  double max_object_speed = 0.03;         // m/s
  double initial_object_speed = 0.03;     // m/s, ramped up to max_object_speed within the stage
  bool randomized_start = false;
  bool se3_motion = false;
  double control_period = 0.05;  // s
};

using StageTable = std::array<StageCoefficients, kNumStages>;

/// Default six-stage schedule.
StageTable default_stage_table();

/// Row of the default table; throws std::out_of_range outside [0, 5].
StageCoefficients stage_coefficients(int stage);

struct TickEvents {
  bool grasped = false;
  bool collided = false;
  bool out_of_view = false;
  bool premature_close = false;
  double keypoint_distance = 0.0;
  double alignment_error = 0.0;
  double action_magnitude = 0.0;
  bool over_distance = false;
};

inline constexpr double kOverDistanceThreshold = 0.25;

double compute_reward(const TickEvents& events, const RewardWeights& weights, const StageCoefficients& coeffs);

inline constexpr std::array<double, kNumStages - 1> kDefaultStageThresholds{40.0, 60.0, 80.0, 100.0, 130.0};

/// Advances at most one stage when `mean_episode_reward` reaches the
/// threshold of the current stage. Throws std::invalid_argument when the
/// thresholds decrease or `current` is out of range.
int curriculum_advance(double mean_episode_reward, int current,
                       const std::array<double, kNumStages - 1>& thresholds = kDefaultStageThresholds);

}  // namespace dyngrasp
