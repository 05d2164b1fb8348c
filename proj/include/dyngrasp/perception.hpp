#pragma once

#include "dyngrasp/ekf.hpp"
#include "dyngrasp/geometry.hpp"
#include "dyngrasp/random.hpp"
#include "dyngrasp/world.hpp"

#include <optional>
#include <vector>

namespace dyngrasp {

/// Eye-on-hand camera. The optical axis is the camera +z axis and the
/// horizontal field of view is measured along camera x.
struct CameraModel {
  Pose mount_offset{Vec3(0.0, 0.0, -0.06), Quat::Identity()};  // gripper -> camera
  double hfov = deg_to_rad(70.0);
  double vfov = deg_to_rad(55.0);
  double min_range = 0.10;
  double max_range = 1.50;

  /// Throws std::invalid_argument when the fields violate the model bounds.
  void validate() const;
  Pose camera_world(const Pose& gripper) const { return pose_compose(gripper, mount_offset); }
  Pose gripper_from_camera(const Pose& camera) const { return pose_compose(camera, pose_inverse(mount_offset)); }
};

bool visibility_test(const CameraModel& camera, const Pose& camera_world, const Vec3& point,
                     const std::vector<Aabb>& obstacles = {});

struct SensorNoise {
  double sigma_pos = 0.005;
  double sigma_rot = deg_to_rad(1.0);
  double lock_translation = 0.02;  // per tick, camera frame
  double lock_rotation = deg_to_rad(5.0);
  int reregister_latency = 2;  // ticks
  double reregister_sigma_pos = 0.008;
  double reregister_sigma_rot = deg_to_rad(3.0);
};

enum class TrackerMode { Locked, Lost, Reacquiring };
const char* to_string(TrackerMode mode);

struct TrackerState {
  TrackerMode mode = TrackerMode::Locked;
  Pose last_tracked_pose;        // camera frame at the time of the last measurement
  Pose last_tracked_world;       // the same pose in the world frame
  std::optional<int> loss_tick;  // tick at which the current loss started
  bool use_reregistration = false;
  int tick = 0;

  std::optional<Pose> previous_object_camera;  // true camera-frame pose one tick ago
  int reacquire_ticks = 0;
  int loss_streak = 0;
  int reregistrations = 0;
  std::optional<PoseMeasurement> last_measurement;  // world frame
  Pose emitted;  // last estimate handed to the controller
};

struct SensorFrame {
  bool visible = false;
  std::optional<PoseMeasurement> measurement;  // camera frame
  int tick = 0;
};

/// Perturbs a pose with isotropic position noise and a random rotation vector.
Pose noisy_pose(const Pose& truth, double sigma_pos, double sigma_rot, Rng& rng);

/// Simulated frame-to-frame tracker. Updates `tracker.mode` (Locked -> Lost on
/// lock loss or occlusion, Lost -> Reacquiring when the object is back in view)
/// and the stored previous camera-frame pose.
SensorFrame sense(const WorldState& world, const CameraModel& camera, TrackerState& tracker,
                  const SensorNoise& noise, Rng& rng);

/// One-shot registration while reacquiring. Returns nothing for the first
/// `reregister_latency` calls of a reacquisition, then the noisy camera-frame
/// pose. `ekf_mean_cam` is the warm start; the result does not depend on it.
std::optional<PoseMeasurement> reregister(const WorldState& world, const CameraModel& camera, TrackerState& tracker,
                                          const Pose& ekf_mean_cam, const SensorNoise& noise, Rng& rng);

struct TrackingConfig {
  bool ekf_enabled = true;
  LossHandling loss;
};

struct TrackingOutput {
  TrackerState tracker;
  FilterState filter;
  Pose estimate;  // world frame, always present
};

TrackingOutput tracking_step(const SensorFrame& frame, const TrackerState& tracker, const FilterState& filter,
                             const Pose& camera_world, double dt, const TrackingConfig& cfg = {});

struct RecoveryConfig {
  int n_samples = 32;
  double radius = 0.45;
  // Candidate rings: (elevation above horizontal, count). A count of 1 at 90
  // degrees is the zenith view.
  std::vector<std::pair<double, int>> rings{{deg_to_rad(90.0), 1}, {deg_to_rad(60.0), 5}, {deg_to_rad(35.0), 10}};
};

struct RecoveryChoice {
  Pose gripper;
  double score = 0.0;
  int index = 0;  // into recovery_candidates(); the last entry is the current pose
};

/// Draws position samples from N(mean, P_pos) of the filter.
std::vector<Vec3> sample_position_cloud(const FilterState& filter, int n, Rng& rng);

/// Gripper poses whose cameras look at `target` from a sphere around it,
/// followed by `current_gripper` itself.
std::vector<Pose> recovery_candidates(const Vec3& target, const Pose& current_gripper, const CameraModel& camera,
                                      const RecoveryConfig& cfg = {});

double viewpoint_score(const CameraModel& camera, const Pose& gripper, const std::vector<Vec3>& samples,
                       const std::vector<Aabb>& obstacles = {});

/// Candidate with the largest fraction of visible samples; ties go to the
/// smallest displacement from the current gripper, then the lowest index.
RecoveryChoice recovery_viewpoint(const FilterState& filter, const CameraModel& camera, const Pose& current_gripper,
                                  Rng& rng, const std::vector<Aabb>& obstacles = {}, const RecoveryConfig& cfg = {});

}  // namespace dyngrasp
