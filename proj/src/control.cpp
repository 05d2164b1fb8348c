#include "dyngrasp/control.hpp"

#include "dyngrasp/grasp.hpp"

namespace dyngrasp {

namespace {

Vec3 clamp_norm(const Vec3& v, double cap) {
  const double n = v.norm();
  return n > cap ? Vec3(v * (cap / n)) : v;
}

Command proportional(const Vec3& goal, const Quat& goal_orientation, const Pose& gripper, const Vec3& feedforward,
                     const ControlGains& g) {
  const Vec3 v_world = clamp_norm(feedforward + g.k_p * (goal - gripper.position), g.max_linear);
  const Vec3 w_world = clamp_norm(g.k_r * rotation_error(gripper.orientation, goal_orientation), g.max_angular);
  Command cmd;
  cmd.twist.linear = gripper.orientation.conjugate() * v_world;
  cmd.twist.angular = gripper.orientation.conjugate() * w_world;
  return cmd;
}

}  // namespace

std::array<Vec3, 3> gripper_keypoints(const Pose& pose) {
  const double half = 0.5 * kMaxGripperWidth;
  return {pose.position, pose.apply(Vec3(half, 0.0, kFingerLength)), pose.apply(Vec3(-half, 0.0, kFingerLength))};
}

Observation build_observation(const Pose& target, const Pose& gripper, const Pose& prev_target, bool gripper_open) {
  Observation obs;
  obs.gripper_keypoints = gripper_keypoints(gripper);
  const auto target_now = gripper_keypoints(target);
  const auto target_prev = gripper_keypoints(prev_target);
  for (std::size_t i = 0; i < 3; ++i) {
    obs.keypoint_error[i] = obs.gripper_keypoints[i] - target_now[i];
    obs.object_delta[i] = target_now[i] - target_prev[i];
  }
  obs.gripper_open = gripper_open;
  return obs;
}

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::Standoff: return "standoff";
    case Phase::Approach: return "approach";
    case Phase::Close: return "close";
  }
  return "unknown";
}

Phase next_phase(Phase phase, const Pose& gripper, const Pose& target, const ControlGains& gains) {
  const double misalignment = geodesic_angle(gripper.orientation, target.orientation);
  switch (phase) {
    case Phase::Standoff:
      return misalignment < gains.align_threshold ? Phase::Approach : Phase::Standoff;
    case Phase::Approach:
      return misalignment > gains.realign_threshold ? Phase::Standoff : Phase::Approach;
    case Phase::Close:
      return Phase::Close;
  }
  return phase;
}

Command pursue(const Observation& obs, const Pose& target, const Pose& gripper, Phase phase,
               const ControlGains& gains, double dt) {
  Vec3 goal = target.position;
  if (phase == Phase::Standoff) goal -= gains.standoff * target.axis(2);
  const Vec3 drift = (obs.object_delta[0] + obs.object_delta[1] + obs.object_delta[2]) / 3.0;
  const Vec3 feedforward = dt > 0.0 ? Vec3(gains.k_ff * drift / dt) : Vec3::Zero();
  Command cmd = proportional(goal, target.orientation, gripper, feedforward, gains);
  cmd.gripper_close = phase != Phase::Standoff && grasp_trigger(gripper, target, gains.eps_pos, gains.eps_ang);
  return cmd;
}

Command recovery_pursue(const Pose& recovery_target, const Pose& gripper, const ControlGains& gains) {
  Command cmd = proportional(recovery_target.position, recovery_target.orientation, gripper, Vec3::Zero(), gains);
  cmd.gripper_close = false;
  return cmd;
}

}  // namespace dyngrasp
