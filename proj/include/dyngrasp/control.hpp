#pragma once

#include "dyngrasp/geometry.hpp"
#include "dyngrasp/world.hpp"

#include <array>

namespace dyngrasp {

/// Policy input: palm and fingertip keypoints of the gripper, their error to
/// the matching keypoints on the grasp target, and the target keypoints'
/// motion since the previous tick.
struct Observation {
  std::array<Vec3, 3> gripper_keypoints;
  std::array<Vec3, 3> keypoint_error;  // gripper - target
  std::array<Vec3, 3> object_delta;    // target now - target one tick ago
  bool gripper_open = true;
};

inline constexpr double kFingerLength = 0.08;

/// Palm, left fingertip, right fingertip of a gripper at `pose`.
std::array<Vec3, 3> gripper_keypoints(const Pose& pose);

Observation build_observation(const Pose& target, const Pose& gripper, const Pose& prev_target,
                              bool gripper_open = true);

enum class Phase { Standoff, Approach, Close };
const char* to_string(Phase phase);

struct ControlGains {
  double k_p = 2.0;  // 1/s
  double k_r = 2.0;  // 1/s
  double max_linear = 0.20;
  double max_angular = 1.5;
  double standoff = 0.06;                     // m back along the approach axis
  double align_threshold = deg_to_rad(10.0);  // leave Standoff below this
  double realign_threshold = deg_to_rad(20.0);
  double k_ff = 1.0;  // weight of the target-motion feedforward
  double eps_pos = 0.01;
  double eps_ang = deg_to_rad(10.0);
};

/// Standoff -> Approach once aligned, back to Standoff if alignment is lost.
/// Close is sticky; the harness leaves it when a grasp attempt resolves.
Phase next_phase(Phase phase, const Pose& gripper, const Pose& target, const ControlGains& gains = {});

/// Scripted pursuit policy. The twist is expressed in the end-effector frame.
/// `dt` converts the observed per-tick target motion into a feedforward
/// velocity.
Command pursue(const Observation& obs, const Pose& target, const Pose& gripper, Phase phase,
               const ControlGains& gains = {}, double dt = 0.05);

/// Same law toward a recovery viewpoint, without feedforward; never closes.
Command recovery_pursue(const Pose& recovery_target, const Pose& gripper, const ControlGains& gains = {});

}  // namespace dyngrasp
