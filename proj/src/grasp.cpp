#include "dyngrasp/grasp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dyngrasp {

namespace {

Quat frame_from_axes(const Vec3& x, const Vec3& z) {
  Mat3 r;
  r.col(0) = x.normalized();
  r.col(2) = z.normalized();
  r.col(1) = r.col(2).cross(r.col(0));
  return Quat(r).normalized();
}

}  // namespace

GraspPool generate_grasp_pool(const Pose& object_pose, const Vec3& object_extent, int k, double finger_depth) {
  if (k < 1) throw std::invalid_argument("generate_grasp_pool: k must be >= 1");
  require_finite(object_pose, "generate_grasp_pool");
  const Vec3 half = 0.5 * object_extent;

  // Offsets in the object frame; composed with the object pose at the end.
  std::vector<GraspCandidate> local;
  local.push_back({{Vec3(0.0, 0.0, half.z() + finger_depth), top_down_orientation()}, 1.0});
  for (int i = 0; i < k - 1; ++i) {
    const double yaw = 2.0 * std::numbers::pi * i / (k - 1);
    const Vec3 out(std::cos(yaw), std::sin(yaw), 0.0);
    const double support = std::abs(out.x()) * half.x() + std::abs(out.y()) * half.y();
    const Vec3 closing(-out.y(), out.x(), 0.0);
    const double tilt = std::numbers::pi / 2.0;  // approach deviation from vertical
    const double score = 1.0 - 0.5 * tilt / (std::numbers::pi / 2.0);
    local.push_back({{(support + finger_depth) * out, frame_from_axes(closing, -out)}, score});
  }
  std::stable_sort(local.begin(), local.end(),
                   [](const GraspCandidate& a, const GraspCandidate& b) { return a.score > b.score; });

  GraspPool pool;
  for (const auto& c : local) pool.candidates.push_back({pose_compose(object_pose, c.pose), c.score});
  return pool;
}

ObjGraspTransform compute_obj_grasp_transform(const Pose& object_pose, const Pose& selected) {
  return {pose_compose(pose_inverse(object_pose), selected)};
}

double grasp_cost(const Pose& gripper, const GraspCandidate& candidate, const SelectionWeights& w) {
  return w.translation * (candidate.pose.position - gripper.position).norm() +
         w.rotation * geodesic_angle(gripper.orientation, candidate.pose.orientation) - w.score * candidate.score;
}

std::size_t select_best_grasp(const Pose& gripper, const std::vector<GraspCandidate>& candidates,
                              const SelectionWeights& w) {
  if (candidates.empty()) throw std::invalid_argument("select_best_grasp: empty candidate list");
  std::size_t best = 0;
  double best_cost = grasp_cost(gripper, candidates[0], w);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double c = grasp_cost(gripper, candidates[i], w);
    if (c < best_cost) {
      best = i;
      best_cost = c;
    }
  }
  return best;
}

bool grasp_trigger(const Pose& gripper, const Pose& grasp, double eps_pos, double eps_ang) {
  return (gripper.position - grasp.position).norm() < eps_pos &&
         geodesic_angle(gripper.orientation, grasp.orientation) < eps_ang;
}

AttemptOutcome attempt_grasp(const WorldState& world, const Pose& grasp_true, const GraspTolerances& tol,
                             double slip_prob, Rng& rng) {
  AttemptOutcome out;
  out.position_error = (world.gripper_pose.position - grasp_true.position).norm();
  out.angle_error = geodesic_angle(world.gripper_pose.orientation, grasp_true.orientation);
  out.within_tolerance = out.position_error <= tol.position && out.angle_error <= tol.angle;
  if (!out.within_tolerance) return out;
  out.slipped = bernoulli(rng, slip_prob);
  out.success = !out.slipped;
  return out;
}

double contact_width(const Pose& object_pose, const Vec3& object_extent, const Pose& grasp) {
  const Vec3 closing_obj = object_pose.orientation.conjugate() * grasp.axis(0);
  return closing_obj.cwiseAbs().dot(object_extent);
}

}  // namespace dyngrasp
