#include "dyngrasp/perception.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dyngrasp {

void CameraModel::validate() const {
  require_finite(mount_offset, "camera mount offset");
  if (!(hfov > 0.0 && hfov < std::numbers::pi) || !(vfov > 0.0 && vfov < std::numbers::pi)) {
    throw std::invalid_argument("camera field of view must lie in (0, pi)");
  }
  if (!(min_range >= 0.0 && min_range < max_range)) {
    throw std::invalid_argument("camera range must satisfy 0 <= min_range < max_range");
  }
}

const char* to_string(TrackerMode mode) {
  switch (mode) {
    case TrackerMode::Locked: return "locked";
    case TrackerMode::Lost: return "lost";
    case TrackerMode::Reacquiring: return "reacquiring";
  }
  return "unknown";
}

bool visibility_test(const CameraModel& camera, const Pose& camera_world, const Vec3& point,
                     const std::vector<Aabb>& obstacles) {
  const Vec3 pc = camera_world.orientation.conjugate() * (point - camera_world.position);
  if (!(pc.z() > 0.0)) return false;
  if (std::atan2(std::abs(pc.x()), pc.z()) > 0.5 * camera.hfov) return false;
  if (std::atan2(std::abs(pc.y()), pc.z()) > 0.5 * camera.vfov) return false;
  const double range = pc.norm();
  if (range < camera.min_range || range > camera.max_range) return false;
  for (const auto& box : obstacles) {
    if (segment_intersects(camera_world.position, point, box)) return false;
  }
  return true;
}

Pose noisy_pose(const Pose& truth, double sigma_pos, double sigma_rot, Rng& rng) {
  const Vec3 dp(standard_normal(rng), standard_normal(rng), standard_normal(rng));
  const Vec3 dr(standard_normal(rng), standard_normal(rng), standard_normal(rng));
  const Vec3 rot = sigma_rot * dr;
  const double angle = rot.norm();
  Quat q = truth.orientation;
  if (angle > 0.0) q = truth.orientation * Quat(Eigen::AngleAxisd(angle, rot / angle));
  return {truth.position + sigma_pos * dp, normalized_quat(q)};
}

SensorFrame sense(const WorldState& world, const CameraModel& camera, TrackerState& tracker,
                  const SensorNoise& noise, Rng& rng) {
  SensorFrame frame;
  frame.tick = tracker.tick;
  const Pose camera_world = camera.camera_world(world.gripper_pose);
  const Pose object_cam = pose_compose(pose_inverse(camera_world), world.object_pose);
  frame.visible = visibility_test(camera, camera_world, world.object_pose.position, world.obstacles);

  bool small_motion = true;
  if (tracker.previous_object_camera) {
    const Pose& prev = *tracker.previous_object_camera;
    small_motion = (object_cam.position - prev.position).norm() <= noise.lock_translation &&
                   geodesic_angle(object_cam.orientation, prev.orientation) <= noise.lock_rotation;
  }
  tracker.previous_object_camera = object_cam;

  if (!frame.visible) {
    tracker.mode = TrackerMode::Lost;
    tracker.reacquire_ticks = 0;
    return frame;
  }
  switch (tracker.mode) {
    case TrackerMode::Locked:
      if (small_motion) {
        const Pose measured = noisy_pose(object_cam, noise.sigma_pos, noise.sigma_rot, rng);
        frame.measurement = PoseMeasurement::from_pose(measured, world.time);
      } else {
        tracker.mode = TrackerMode::Lost;
      }
      break;
    case TrackerMode::Lost:
      tracker.mode = TrackerMode::Reacquiring;
      tracker.use_reregistration = true;
      tracker.reacquire_ticks = 0;
      break;
    case TrackerMode::Reacquiring:
      break;
  }
  return frame;
}

std::optional<PoseMeasurement> reregister(const WorldState& world, const CameraModel& camera, TrackerState& tracker,
                                          const Pose& ekf_mean_cam, const SensorNoise& noise, Rng& rng) {
  (void)ekf_mean_cam;
  const Pose camera_world = camera.camera_world(world.gripper_pose);
  if (!visibility_test(camera, camera_world, world.object_pose.position, world.obstacles)) {
    throw std::logic_error("reregister called while the object is not visible");
  }
  if (tracker.reacquire_ticks++ < noise.reregister_latency) return std::nullopt;
  const Pose object_cam = pose_compose(pose_inverse(camera_world), world.object_pose);
  const Pose measured = noisy_pose(object_cam, noise.reregister_sigma_pos, noise.reregister_sigma_rot, rng);
  ++tracker.reregistrations;
  return PoseMeasurement::from_pose(measured, world.time);
}

TrackingOutput tracking_step(const SensorFrame& frame, const TrackerState& tracker, const FilterState& filter,
                             const Pose& camera_world, double dt, const TrackingConfig& cfg) {
  if (!std::isfinite(dt) || !(dt > 0.0)) throw std::invalid_argument("tracking_step: dt must be > 0");

  TrackingOutput out{tracker, filter, {}};
  TrackerState& tr = out.tracker;
  tr.tick = frame.tick + 1;

  if (frame.measurement) {
    const Pose measured_world = pose_compose(camera_world, frame.measurement->pose());
    const PoseMeasurement m = PoseMeasurement::from_pose(measured_world, frame.measurement->timestamp);
    if (cfg.ekf_enabled) out.filter = ekf_update(ekf_predict(filter, dt), m);

    // The re-registration flag survives exactly one tick of normal tracking.
    tr.use_reregistration = tracker.mode == TrackerMode::Reacquiring;
    tr.mode = TrackerMode::Locked;
    tr.loss_tick.reset();
    tr.loss_streak = 0;
    tr.reacquire_ticks = 0;
    tr.last_measurement = m;
    tr.last_tracked_pose = frame.measurement->pose();
    tr.last_tracked_world = measured_world;
    out.estimate = cfg.ekf_enabled ? out.filter.pose() : measured_world;
  } else {
    if (tr.mode == TrackerMode::Locked) tr.mode = TrackerMode::Lost;
    if (!tr.loss_tick) tr.loss_tick = frame.tick;
    if (cfg.ekf_enabled) {
      out.filter = ekf_predict(filter, dt);
      if (cfg.loss.refeed_last_measurement && tr.last_measurement) {
        ++tr.loss_streak;
        const double scale =
            std::min(std::pow(cfg.loss.refeed_inflation, tr.loss_streak), cfg.loss.refeed_inflation_cap);
        PoseMeasurement stale = *tr.last_measurement;
        stale.timestamp = out.filter.last_update_time;
        out.filter = ekf_update(out.filter, stale, scale);
      }
      out.estimate = clamped_estimate(out.filter, tracker.emitted, dt, cfg.loss);
    } else {
      out.estimate = tr.last_tracked_world;
    }
  }
  tr.emitted = out.estimate;
  return out;
}

std::vector<Vec3> sample_position_cloud(const FilterState& filter, int n, Rng& rng) {
  const Mat3 cov = filter.position_covariance();
  if (!cov.allFinite()) throw std::invalid_argument("sample_position_cloud: non-finite covariance");
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (cov + cov.transpose()));
  const Mat3 root = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const Vec3 mean = filter.position();
  std::vector<Vec3> samples;
  samples.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) {
    const Vec3 z(standard_normal(rng), standard_normal(rng), standard_normal(rng));
    samples.push_back(mean + root * z);
  }
  return samples;
}

namespace {

// Camera orientation with +z toward `forward` and +x as close as possible to
// `x_hint`.
Quat look_rotation(const Vec3& forward, const Vec3& x_hint) {
  const Vec3 z = forward.normalized();
  Vec3 x = x_hint - x_hint.dot(z) * z;
  if (x.norm() < 1e-6) {
    const Vec3 alt = std::abs(z.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    x = alt - alt.dot(z) * z;
  }
  x.normalize();
  Mat3 r;
  r.col(0) = x;
  r.col(1) = z.cross(x);
  r.col(2) = z;
  return Quat(r).normalized();
}

}  // namespace

std::vector<Pose> recovery_candidates(const Vec3& target, const Pose& current_gripper, const CameraModel& camera,
                                      const RecoveryConfig& cfg) {
  const Vec3 x_hint = camera.camera_world(current_gripper).axis(0);
  std::vector<Pose> out;
  for (const auto& [elevation, count] : cfg.rings) {
    for (int i = 0; i < count; ++i) {
      const double azimuth = 2.0 * std::numbers::pi * i / count;
      const Vec3 dir(std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
                     std::sin(elevation));
      const Pose cam{target + cfg.radius * dir, look_rotation(-dir, x_hint)};
      out.push_back(camera.gripper_from_camera(cam));
    }
  }
  out.push_back(current_gripper);
  return out;
}

double viewpoint_score(const CameraModel& camera, const Pose& gripper, const std::vector<Vec3>& samples,
                       const std::vector<Aabb>& obstacles) {
  if (samples.empty()) return 0.0;
  const Pose cam = camera.camera_world(gripper);
  int seen = 0;
  for (const auto& p : samples) seen += visibility_test(camera, cam, p, obstacles) ? 1 : 0;
  return static_cast<double>(seen) / static_cast<double>(samples.size());
}

RecoveryChoice recovery_viewpoint(const FilterState& filter, const CameraModel& camera, const Pose& current_gripper,
                                  Rng& rng, const std::vector<Aabb>& obstacles, const RecoveryConfig& cfg) {
  const std::vector<Vec3> samples = sample_position_cloud(filter, cfg.n_samples, rng);
  const std::vector<Pose> candidates = recovery_candidates(filter.position(), current_gripper, camera, cfg);

  RecoveryChoice best;
  double best_disp = std::numeric_limits<double>::infinity();
  best.score = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double score = viewpoint_score(camera, candidates[i], samples, obstacles);
    const double disp = (candidates[i].position - current_gripper.position).norm();
    if (score > best.score || (score == best.score && disp < best_disp)) {
      best = {candidates[i], score, static_cast<int>(i)};
      best_disp = disp;
    }
  }
  return best;
}

}  // namespace dyngrasp
