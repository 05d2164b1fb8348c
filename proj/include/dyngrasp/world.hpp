#pragma once

#include "dyngrasp/geometry.hpp"
#include "dyngrasp/random.hpp"

#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace dyngrasp {

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// ---------------------------------------------------------------------------
// Workspace geometry
//
// The base workspace is a 0.40 m cube centered at (0.50, 0.00, 0.30) in the
// robot frame (right-handed, z up). The two flank partitions are 0.15 m slabs
// on either side of it along y; together the three form the extended
// 0.40 x 0.70 x 0.40 m workspace.
// ---------------------------------------------------------------------------

enum class WorkspaceId { Base, FlankA, FlankB, Extended };

struct Workspace {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  WorkspaceId id = WorkspaceId::Base;

  static Workspace preset(WorkspaceId id);
  Aabb box() const { return {min, max}; }
  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  bool contains(const Vec3& p, double tol = 1e-12) const { return box().contains(p, tol); }
};

inline const Vec3 kBaseWorkspaceCenter{0.50, 0.00, 0.30};
inline constexpr double kBaseWorkspaceSize = 0.40;
inline constexpr double kFlankWidth = 0.15;

std::string to_string(WorkspaceId id);
WorkspaceId workspace_from_string(const std::string& name);

// ---------------------------------------------------------------------------
// Target motion
// ---------------------------------------------------------------------------

enum class MotionKind { LinearRegular, LinearFast, Random, Disruptive };

std::string to_string(MotionKind kind);
MotionKind motion_kind_from_string(const std::string& name);

struct MotionPattern {
  MotionKind kind = MotionKind::LinearRegular;
  double speed_min = 0.0;  // m/s
  double speed_max = 0.05;

  // Random motion: piecewise segments; each segment draws a target velocity
  // and a per-axis rotation increment in [-rot_step_max, rot_step_max] that is
  // spread over the segment.
  double rot_step_max = deg_to_rad(14.5);
  double segment_min_s = 1.0;
  double segment_max_s = 3.0;
  double velocity_time_constant = 0.5;  // s, mean reversion toward the segment target
  double jitter = 0.01;                 // m/s/sqrt(s), keeps the object oscillating

  // Disruptive motion: regular linear motion until a trigger, then an escape.
  double disrupt_prob = 1.0;
  double disrupt_speed_min = 0.45;  // m/s
  double disrupt_speed_max = 0.60;
  double trigger_min_s = 1.0;
  double trigger_max_s = 3.0;
  double trigger_range = 0.25;  // escape only starts once the gripper is this close
  double escape_distance_min = 0.35;
  double escape_distance_max = 0.45;
  double escape_max_duration = 2.0;

  static MotionPattern linear_regular();
  static MotionPattern linear_fast();
  static MotionPattern random();
  static MotionPattern disruptive();
  /// Linear motion at exactly `speed` m/s.
  static MotionPattern constant_speed(double speed);
};

struct DisruptionState {
  bool armed = false;
  double trigger_time = 0.0;
  int trigger_count = 0;
  bool escaping = false;
  bool stopped = false;
  Vec3 direction = Vec3::Zero();
  double speed = 0.0;
  double distance_goal = 0.0;
  double traveled = 0.0;
  double elapsed = 0.0;
};

struct MotionState {
  Vec3 target_velocity = Vec3::Zero();
  double segment_left = 0.0;
  DisruptionState disruption;
};

struct InitialPoseConfig {
  double yaw_range = deg_to_rad(45.0);  // yaw uniform in [-yaw_range, yaw_range]
  double tilt_range = deg_to_rad(10.0);
};

// ---------------------------------------------------------------------------
// World state and gripper
// ---------------------------------------------------------------------------

inline constexpr double kMaxGripperWidth = 0.085;  // 2F-85 stroke

struct WorldState {
  Pose object_pose;
  Twist object_twist;  // linear in world frame, angular in object body frame
  Vec3 object_extent{0.05, 0.05, 0.05};
  Pose gripper_pose;
  double gripper_width = kMaxGripperWidth;
  std::optional<double> grip_contact_width;  // fingers stop here when closing on the object
  bool grasp_engaged = false;                // closing or holding; suppresses object-contact collisions
  std::vector<Aabb> obstacles;
  double time = 0.0;
  Workspace workspace = Workspace::preset(WorkspaceId::Base);
  Workspace reachable = Workspace::preset(WorkspaceId::Extended);
  MotionState motion;
};

struct Command {
  Twist twist;  // end-effector frame
  bool gripper_close = false;
};

struct GripperLimits {
  double max_linear = 0.20;   // m/s
  double max_angular = 1.5;   // rad/s
  double width_rate = 0.20;   // m/s of finger opening
};

struct CollisionConfig {
  Vec3 gripper_box_extent{0.10, 0.10, 0.12};
  Vec3 gripper_box_offset{0.0, 0.0, -0.06};  // box center in the gripper frame (z = approach)
  double object_penetration_tol = 0.005;
};

/// Top-down home pose: approach axis (+z of the gripper) points along world
/// -z, closing axis (+x) along world +y.
Pose default_gripper_home();
Quat top_down_orientation(double yaw = 0.0);

Pose sample_initial_object_pose(const Workspace& workspace, Rng& rng, const InitialPoseConfig& cfg = {});

/// Draws the per-episode motion parameters (initial velocity, disruption
/// trigger and escape) for a freshly placed object.
WorldState init_motion(WorldState state, const MotionPattern& pattern, Rng& rng);

/// Predicate telling the disruptive escape whether a point is currently seen
/// by the camera; an empty function means "never seen".
using InViewFn = std::function<bool(const Vec3&)>;

WorldState object_step(const WorldState& state, const MotionPattern& pattern, double dt, Rng& rng,
                       const InViewFn& in_view = {});

WorldState gripper_step(const WorldState& state, const Command& cmd, double dt, const GripperLimits& limits = {});

bool collision_check(const WorldState& state, const CollisionConfig& cfg = {});

/// Two thin walls parallel to x at y = +-0.25 m, used for occlusion-heavy scenes.
std::vector<Aabb> complex_scene_obstacles();

}  // namespace dyngrasp
