#include "dyngrasp/reward.hpp"

#include <stdexcept>
#include <string>

namespace dyngrasp {

StageTable default_stage_table() {
  StageTable t;
  for (int i = 0; i < kNumStages; ++i) t[i].stage = i;

  // Stage 1: sharper shaping and episode reset on loss of view.
  t[1].dist = 2.0;
  t[1].dist_over = 6.0;
  t[1].align = 2.0;
  t[1].collision = 10.0;
  t[1].view = 10.0;
  t[1].strict_view_reset = true;

  // Stage 2: same weights, faster objects and randomized robot start.
  t[2] = t[1];
  t[2].stage = 2;
  t[2].initial_object_speed = 0.05;
  t[2].max_object_speed = 0.125;
  t[2].randomized_start = true;

  // Stage 3: view keeping and alignment weighted further.
  t[3] = t[2];
  t[3].stage = 3;
  t[3].view = 60.0;
  t[3].align = 4.0;
  t[3].initial_object_speed = t[3].max_object_speed;

  // Stage 4: full SE(3) object motion at twice the control rate.
  t[4] = t[3];
  t[4].stage = 4;
  t[4].se3_motion = true;
  t[4].control_period = 0.025;

  // Stage 5: final emphasis on view keeping, collisions and alignment.
  t[5] = t[4];
  t[5].stage = 5;
  t[5].view = 80.0;
  t[5].collision = 80.0;
  t[5].align = 8.0;
  return t;
}

StageCoefficients stage_coefficients(int stage) {
  if (stage < 0 || stage >= kNumStages) {
    throw std::out_of_range("curriculum stage " + std::to_string(stage) + " outside [0, 5]");
  }
  return default_stage_table()[static_cast<std::size_t>(stage)];
}

double compute_reward(const TickEvents& e, const RewardWeights& w, const StageCoefficients& c) {
  double r = 0.0;
  if (e.grasped) r += w.grasp;
  r += c.dist * w.dist * e.keypoint_distance;
  if (e.over_distance) r += c.dist_over * w.dist_over;
  r += c.align * w.align * e.alignment_error;
  if (e.collided) r += c.collision * w.collision;
  if (e.out_of_view) r += c.view * w.view;
  if (e.premature_close) r += c.gripper * w.gripper;
  r += c.move * w.move * e.action_magnitude;
  return r;
}

int curriculum_advance(double mean_episode_reward, int current, const std::array<double, kNumStages - 1>& thresholds) {
  if (current < 0 || current >= kNumStages) throw std::invalid_argument("curriculum_advance: stage out of range");
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (thresholds[i] < thresholds[i - 1]) {
      throw std::invalid_argument("curriculum_advance: thresholds must be non-decreasing");
    }
  }
  if (current == kNumStages - 1) return current;
  return mean_episode_reward >= thresholds[static_cast<std::size_t>(current)] ? current + 1 : current;
}

}  // namespace dyngrasp
