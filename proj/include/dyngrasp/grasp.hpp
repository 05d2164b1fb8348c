#pragma once

#include "dyngrasp/geometry.hpp"
#include "dyngrasp/random.hpp"
#include "dyngrasp/world.hpp"

#include <vector>

namespace dyngrasp {

struct GraspCandidate {
  Pose pose;           // world frame
  double score = 0.0;  // in [0, 1]
};

/// Candidate grasps for one object, sorted by descending score.
struct GraspPool {
  std::vector<GraspCandidate> candidates;
};

struct GraspPoolConfig {
  int count = 5;
  double finger_depth = 0.04;  // palm clearance beyond the object surface
};

/// One top-down grasp plus `k - 1` horizontal approaches at evenly spaced
/// yaws in the object frame. The grasp frame's +z is the approach direction
/// and +x the closing direction.
GraspPool generate_grasp_pool(const Pose& object_pose, const Vec3& object_extent, int k, double finger_depth = 0.04);

struct ObjGraspTransform {
  Pose offset;  // object frame -> grasp frame
};

ObjGraspTransform compute_obj_grasp_transform(const Pose& object_pose, const Pose& selected);

/// Grasp pose that rigidly follows the object.
inline Pose grasp_pose(const Pose& object_pose, const ObjGraspTransform& t) {
  return pose_compose(object_pose, t.offset);
}

struct SelectionWeights {
  double translation = 1.0;  // per meter
  double rotation = 0.3;     // per radian
  double score = 0.05;
};

double grasp_cost(const Pose& gripper, const GraspCandidate& candidate, const SelectionWeights& w = {});

/// Index of the cheapest candidate; the lowest index wins ties. Throws
/// std::invalid_argument on an empty list.
std::size_t select_best_grasp(const Pose& gripper, const std::vector<GraspCandidate>& candidates,
                              const SelectionWeights& w = {});

bool grasp_trigger(const Pose& gripper, const Pose& grasp, double eps_pos = 0.01, double eps_ang = deg_to_rad(10.0));

struct GraspTolerances {
  double position = 0.015;
  double angle = deg_to_rad(15.0);
};

struct GraspAttempt {
  double triggered_at = 0.0;
  bool success = false;
  int retries_used = 0;
};

struct AttemptOutcome {
  bool success = false;
  bool within_tolerance = false;
  bool slipped = false;
  double position_error = 0.0;
  double angle_error = 0.0;
};

/// Closure outcome given the true grasp pose: the gripper must be within the
/// tolerances, then the object survives a Bernoulli slip. No random draw is
/// made when the tolerance check fails.
AttemptOutcome attempt_grasp(const WorldState& world, const Pose& grasp_true, const GraspTolerances& tol,
                             double slip_prob, Rng& rng);

/// Fingers closed on nothing: width strictly below the threshold.
inline bool detect_grasp_failure(double gripper_width, double closed_threshold = 0.01) {
  return gripper_width < closed_threshold;
}

/// Object width seen by the fingers of a gripper at `grasp` (extent along the
/// grasp closing axis).
double contact_width(const Pose& object_pose, const Vec3& object_extent, const Pose& grasp);

}  // namespace dyngrasp
