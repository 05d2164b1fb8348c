#include "dyngrasp/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dyngrasp {

Workspace Workspace::preset(WorkspaceId id) {
  const Vec3 half = Vec3::Constant(0.5 * kBaseWorkspaceSize);
  const Vec3 lo = kBaseWorkspaceCenter - half;
  const Vec3 hi = kBaseWorkspaceCenter + half;
  switch (id) {
    case WorkspaceId::Base:
      return {lo, hi, id};
    case WorkspaceId::FlankA:
      return {Vec3(lo.x(), lo.y() - kFlankWidth, lo.z()), Vec3(hi.x(), lo.y(), hi.z()), id};
    case WorkspaceId::FlankB:
      return {Vec3(lo.x(), hi.y(), lo.z()), Vec3(hi.x(), hi.y() + kFlankWidth, hi.z()), id};
    case WorkspaceId::Extended:
      return {Vec3(lo.x(), lo.y() - kFlankWidth, lo.z()), Vec3(hi.x(), hi.y() + kFlankWidth, hi.z()), id};
  }
  throw std::invalid_argument("unknown workspace id");
}

std::string to_string(WorkspaceId id) {
  switch (id) {
    case WorkspaceId::Base: return "base";
    case WorkspaceId::FlankA: return "flank_a";
    case WorkspaceId::FlankB: return "flank_b";
    case WorkspaceId::Extended: return "extended";
  }
  return "unknown";
}

WorkspaceId workspace_from_string(const std::string& name) {
  for (auto id : {WorkspaceId::Base, WorkspaceId::FlankA, WorkspaceId::FlankB, WorkspaceId::Extended}) {
    if (to_string(id) == name) return id;
  }
  throw std::invalid_argument("unknown workspace '" + name + "'");
}

std::string to_string(MotionKind kind) {
  switch (kind) {
    case MotionKind::LinearRegular: return "linear_regular";
    case MotionKind::LinearFast: return "linear_fast";
    case MotionKind::Random: return "random";
    case MotionKind::Disruptive: return "disruptive";
  }
  return "unknown";
}

MotionKind motion_kind_from_string(const std::string& name) {
  for (auto k : {MotionKind::LinearRegular, MotionKind::LinearFast, MotionKind::Random, MotionKind::Disruptive}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown motion kind '" + name + "'");
}

MotionPattern MotionPattern::linear_regular() { return {}; }

MotionPattern MotionPattern::linear_fast() {
  MotionPattern p;
  p.kind = MotionKind::LinearFast;
  p.speed_max = 0.15;
  return p;
}

MotionPattern MotionPattern::random() {
  MotionPattern p;
  p.kind = MotionKind::Random;
  return p;
}

MotionPattern MotionPattern::disruptive() {
  MotionPattern p;
  p.kind = MotionKind::Disruptive;
  return p;
}

MotionPattern MotionPattern::constant_speed(double speed) {
  MotionPattern p;
  p.kind = speed > 0.05 ? MotionKind::LinearFast : MotionKind::LinearRegular;
  p.speed_min = p.speed_max = speed;
  return p;
}

Quat top_down_orientation(double yaw) {
  Mat3 down;
  down << 0.0, 1.0, 0.0,
          1.0, 0.0, 0.0,
          0.0, 0.0, -1.0;
  return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Quat(down));
}

Pose default_gripper_home() { return {Vec3(0.50, 0.00, 1.05), top_down_orientation()}; }

namespace {

Vec3 random_unit_vector(Rng& rng) {
  for (;;) {
    const Vec3 v(standard_normal(rng), standard_normal(rng), standard_normal(rng));
    const double n = v.norm();
    if (n > 1e-9) return v / n;
  }
}

// Specular reflection of a point (and its velocity) back into [lo, hi].
void reflect_into(Vec3& p, Vec3& v, Vec3* target_v, const Vec3& lo, const Vec3& hi) {
  for (int i = 0; i < 3; ++i) {
    for (int guard = 0; guard < 4 && (p[i] < lo[i] || p[i] > hi[i]); ++guard) {
      if (p[i] < lo[i]) p[i] = 2.0 * lo[i] - p[i];
      if (p[i] > hi[i]) p[i] = 2.0 * hi[i] - p[i];
      v[i] = -v[i];
      if (target_v) (*target_v)[i] = -(*target_v)[i];
    }
    p[i] = std::clamp(p[i], lo[i], hi[i]);
  }
}

// Longest distance from p along dir that stays inside [lo, hi].
double free_run(const Vec3& p, const Vec3& dir, const Vec3& lo, const Vec3& hi) {
  double t = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (dir[i] > 1e-12) t = std::min(t, (hi[i] - p[i]) / dir[i]);
    if (dir[i] < -1e-12) t = std::min(t, (lo[i] - p[i]) / dir[i]);
  }
  return std::max(0.0, t);
}

// The object bolts along its current horizontal heading; when the reachable
// workspace is too short in that direction the nearest feasible heading is
// used instead.
void start_escape(WorldState& s, Rng& rng) {
  auto& d = s.motion.disruption;
  const Vec3 p = s.object_pose.position;
  const Vec3 heading(s.object_twist.linear.x(), s.object_twist.linear.y(), 0.0);
  const double base_az = heading.norm() > 1e-9 ? std::atan2(heading.y(), heading.x())
                                               : uniform(rng, -std::numbers::pi, std::numbers::pi);

  Vec3 best_dir(std::cos(base_az), std::sin(base_az), 0.0);
  double best_run = -1.0;
  for (int k = 0; k <= 18; ++k) {
    bool found = false;
    for (double sign : {1.0, -1.0}) {
      const double az = base_az + sign * deg_to_rad(10.0 * k);
      const Vec3 dir(std::cos(az), std::sin(az), 0.0);
      const double run = free_run(p, dir, s.reachable.min, s.reachable.max);
      if (run > best_run) {
        best_dir = dir;
        best_run = run;
      }
      if (run >= d.distance_goal) {
        best_dir = dir;
        found = true;
        break;
      }
      if (k == 0 || k == 18) break;
    }
    if (found) {
      best_run = d.distance_goal;
      break;
    }
  }
  d.direction = best_dir;
  d.distance_goal = std::min(d.distance_goal, best_run);
  d.escaping = true;
  d.traveled = 0.0;
  d.elapsed = 0.0;
  ++d.trigger_count;
  s.object_twist.linear = d.direction * d.speed;
  s.object_twist.angular.setZero();
}

void stop_object(WorldState& s) {
  auto& d = s.motion.disruption;
  d.escaping = false;
  d.stopped = true;
  s.object_twist = Twist{};
}

void step_linear(WorldState& s, double dt) {
  Vec3 p = s.object_pose.position + s.object_twist.linear * dt;
  reflect_into(p, s.object_twist.linear, nullptr, s.workspace.min, s.workspace.max);
  s.object_pose.position = p;
}

void step_random(WorldState& s, const MotionPattern& pattern, double dt, Rng& rng) {
  auto& m = s.motion;
  m.segment_left -= dt;
  if (m.segment_left <= 0.0) {
    const double duration = uniform(rng, pattern.segment_min_s, pattern.segment_max_s);
    m.segment_left += duration;
    m.target_velocity = random_unit_vector(rng) * uniform(rng, 0.0, pattern.speed_max);
    Vec3 increment;
    for (int i = 0; i < 3; ++i) increment[i] = uniform(rng, -pattern.rot_step_max, pattern.rot_step_max);
    s.object_twist.angular = increment / duration;
  }

  Vec3 v = s.object_twist.linear;
  const double alpha = std::min(1.0, dt / pattern.velocity_time_constant);
  v += alpha * (m.target_velocity - v);
  const double sq = std::sqrt(dt);
  v += pattern.jitter * sq * Vec3(standard_normal(rng), standard_normal(rng), standard_normal(rng));
  const double speed = v.norm();
  if (speed > pattern.speed_max) v *= pattern.speed_max / speed;

  Vec3 p = s.object_pose.position + v * dt;
  reflect_into(p, v, &m.target_velocity, s.workspace.min, s.workspace.max);
  s.object_twist.linear = v;
  s.object_pose.position = p;
  s.object_pose.orientation = quat_exp_integrate(s.object_pose.orientation, s.object_twist.angular, dt);
}

void step_disruptive(WorldState& s, const MotionPattern& pattern, double dt, Rng& rng, const InViewFn& in_view) {
  auto& d = s.motion.disruption;
  if (d.stopped) {
    s.object_twist = Twist{};
    return;
  }
  if (!d.escaping) {
    const bool near = (s.gripper_pose.position - s.object_pose.position).norm() <= pattern.trigger_range;
    if (d.armed && d.trigger_count == 0 && s.time >= d.trigger_time && near) {
      start_escape(s, rng);
    } else {
      step_linear(s, dt);
      return;
    }
  }

  const Vec3 next = s.object_pose.position + s.object_twist.linear * dt;
  if (!s.reachable.contains(next)) {
    stop_object(s);
    return;
  }
  s.object_pose.position = next;
  d.traveled += d.speed * dt;
  d.elapsed += dt;
  const bool seen = in_view ? in_view(next) : false;
  if ((d.traveled >= d.distance_goal && !seen) || d.elapsed >= pattern.escape_max_duration) stop_object(s);
}

}  // namespace

Pose sample_initial_object_pose(const Workspace& workspace, Rng& rng, const InitialPoseConfig& cfg) {
  const Vec3 ext = workspace.extent();
  // Faces are picked in proportion to their area so the position is uniform
  // over the box surface.
  const std::array<double, 3> face_area{ext.y() * ext.z(), ext.x() * ext.z(), ext.x() * ext.y()};
  const double total = 2.0 * (face_area[0] + face_area[1] + face_area[2]);
  double u = uniform(rng, 0.0, total);
  int axis = 0;
  bool upper = false;
  for (int i = 0; i < 3; ++i) {
    if (u < 2.0 * face_area[i] || i == 2) {
      axis = i;
      upper = u >= face_area[i];
      break;
    }
    u -= 2.0 * face_area[i];
  }

  Vec3 p;
  for (int i = 0; i < 3; ++i) p[i] = uniform(rng, workspace.min[i], workspace.max[i]);
  p[axis] = upper ? workspace.max[axis] : workspace.min[axis];

  const double yaw = uniform(rng, -cfg.yaw_range, cfg.yaw_range);
  const double roll = uniform(rng, -cfg.tilt_range, cfg.tilt_range);
  const double pitch = uniform(rng, -cfg.tilt_range, cfg.tilt_range);
  const Quat q = Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                 Eigen::AngleAxisd(roll, Vec3::UnitX());
  return {p, q.normalized()};
}

WorldState init_motion(WorldState s, const MotionPattern& pattern, Rng& rng) {
  s.motion = MotionState{};
  s.object_twist = Twist{};
  switch (pattern.kind) {
    case MotionKind::LinearRegular:
    case MotionKind::LinearFast:
      s.object_twist.linear = random_unit_vector(rng) * uniform(rng, pattern.speed_min, pattern.speed_max);
      break;
    case MotionKind::Random:
      s.motion.segment_left = 0.0;  // first step draws a segment
      break;
    case MotionKind::Disruptive: {
      s.object_twist.linear = random_unit_vector(rng) * uniform(rng, pattern.speed_min, pattern.speed_max);
      auto& d = s.motion.disruption;
      d.armed = bernoulli(rng, pattern.disrupt_prob);
      d.trigger_time = uniform(rng, pattern.trigger_min_s, pattern.trigger_max_s);
      d.speed = uniform(rng, pattern.disrupt_speed_min, pattern.disrupt_speed_max);
      d.distance_goal = uniform(rng, pattern.escape_distance_min, pattern.escape_distance_max);
      break;
    }
  }
  return s;
}

WorldState object_step(const WorldState& state, const MotionPattern& pattern, double dt, Rng& rng,
                       const InViewFn& in_view) {
  if (!std::isfinite(dt) || !(dt > 0.0)) throw std::invalid_argument("object_step: dt must be > 0");
  WorldState s = state;
  switch (pattern.kind) {
    case MotionKind::LinearRegular:
    case MotionKind::LinearFast:
      step_linear(s, dt);
      break;
    case MotionKind::Random:
      step_random(s, pattern, dt, rng);
      break;
    case MotionKind::Disruptive:
      step_disruptive(s, pattern, dt, rng, in_view);
      break;
  }
  s.time = state.time + dt;
  return s;
}

WorldState gripper_step(const WorldState& state, const Command& cmd, double dt, const GripperLimits& limits) {
  if (!std::isfinite(dt) || !(dt > 0.0)) throw std::invalid_argument("gripper_step: dt must be > 0");
  require_finite(cmd.twist.linear, "gripper_step");
  require_finite(cmd.twist.angular, "gripper_step");

  WorldState s = state;
  Vec3 v = cmd.twist.linear;
  Vec3 w = cmd.twist.angular;
  if (v.norm() > limits.max_linear) v *= limits.max_linear / v.norm();
  if (w.norm() > limits.max_angular) w *= limits.max_angular / w.norm();

  s.gripper_pose.position += state.gripper_pose.orientation * v * dt;
  s.gripper_pose.orientation = quat_integrate(state.gripper_pose.orientation, w, dt);

  const double step = limits.width_rate * dt;
  if (cmd.gripper_close) {
    const double stop = s.grip_contact_width.value_or(0.0);
    s.gripper_width = std::max(std::min(stop, s.gripper_width), s.gripper_width - step);
  } else {
    s.gripper_width = std::min(kMaxGripperWidth, s.gripper_width + step);
  }
  return s;
}

bool collision_check(const WorldState& state, const CollisionConfig& cfg) {
  const auto body = OrientedBox::attached(state.gripper_pose, cfg.gripper_box_extent, cfg.gripper_box_offset);
  for (const auto& obstacle : state.obstacles) {
    if (box_penetration(body, OrientedBox::from_aabb(obstacle)) > 0.0) return true;
  }
  if (state.grasp_engaged) return false;
  const auto object = OrientedBox::attached(state.object_pose, state.object_extent);
  return box_penetration(body, object) > cfg.object_penetration_tol;
}

std::vector<Aabb> complex_scene_obstacles() {
  const double lateral = 0.25;
  const double thickness = 0.02;
  const Vec3 lo(0.30, 0.0, 0.10);
  const Vec3 hi(0.70, 0.0, 0.45);
  std::vector<Aabb> walls;
  for (double side : {-1.0, 1.0}) {
    const double y = side * lateral;
    walls.push_back({Vec3(lo.x(), y - 0.5 * thickness, lo.z()), Vec3(hi.x(), y + 0.5 * thickness, hi.z())});
  }
  return walls;
}

}  // namespace dyngrasp
