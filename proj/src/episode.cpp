#include "dyngrasp/episode.hpp"

#include <cmath>
#include <stdexcept>

namespace dyngrasp {

std::string to_string(SceneKind kind) { return kind == SceneKind::Complex ? "complex" : "regular"; }

SceneKind scene_kind_from_string(const std::string& name) {
  if (name == "regular") return SceneKind::Regular;
  if (name == "complex") return SceneKind::Complex;
  throw std::invalid_argument("unknown scene kind '" + name + "'");
}

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Success: return "success";
    case Outcome::Timeout: return "timeout";
    case Outcome::Collision: return "collision";
    case Outcome::TrackingFailure: return "tracking_failure";
  }
  return "unknown";
}

NoiseConfig FilterNoiseConfig::noise() const {
  return {NoiseConfig::diagonal_q(q_pos, q_vel, q_quat, q_omega), NoiseConfig::diagonal_r(r_pos, r_quat)};
}

int EpisodeConfig::max_ticks() const { return static_cast<int>(std::llround(t_max / dt)); }

void EpisodeConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("episode config: " + msg); };
  if (!std::isfinite(dt) || !(dt > 0.0)) fail("dt must be > 0");
  if (!std::isfinite(t_max) || !(t_max > 0.0)) fail("t_max must be > 0");
  if (std::abs(t_max / dt - std::round(t_max / dt)) > 1e-6) fail("t_max must be an integral multiple of dt");
  if (stage < 0 || stage >= kNumStages) fail("stage must lie in [0, 5]");
  if (startup_delay < 0.0) fail("startup_delay must be >= 0");
  if (!(recovery_replan_period > 0.0)) fail("recovery_replan_period must be > 0");
  if (motion.speed_min < 0.0 || motion.speed_max < motion.speed_min) fail("motion speed range is invalid");
  if ((object_extent.array() <= 0.0).any()) fail("object extent must be positive");
  camera.validate();
  if (pool.count < 1) fail("grasp pool count must be >= 1");
  if (grasp.max_retries < 0) fail("max_retries must be >= 0");
  if (grasp.slip_prob < 0.0 || grasp.slip_prob > 1.0) fail("slip_prob must lie in [0, 1]");
  if (grasp.stabilization_ticks < 0) fail("stabilization_ticks must be >= 0");
  if (!(grasp.lift_speed > 0.0) || grasp.lift_height < 0.0) fail("lift parameters are invalid");
  if (!(gains.max_linear > 0.0) || !(gains.max_angular > 0.0)) fail("controller caps must be > 0");
  if (recovery.n_samples < 1) fail("recovery n_samples must be >= 1");
  const double p0 = filter.p0;
  if (!(p0 >= 0.0) || !(filter.r_pos > 0.0) || !(filter.r_quat > 0.0)) fail("filter noise must be positive");
}

Outcome classify_outcome(const TerminalFlags& flags) {
  if (flags.collided) return Outcome::Collision;
  if (flags.tracking_failed) return Outcome::TrackingFailure;
  if (flags.lifted) return Outcome::Success;
  return Outcome::Timeout;
}

void TrackingFailureMonitor::update(double error, double dt) {
  if (error > cfg_.distance) {
    over_time_ += dt;
  } else {
    over_time_ = 0.0;
  }
}

namespace {

enum class GraspStage { Open, Closing, Holding, Lifting, Reopening };

Command hold_still() {
  Command cmd;
  cmd.gripper_close = true;
  return cmd;
}

double mean_keypoint_distance(const Pose& gripper, const Pose& target) {
  const auto a = gripper_keypoints(gripper);
  const auto b = gripper_keypoints(target);
  return ((a[0] - b[0]).norm() + (a[1] - b[1]).norm() + (a[2] - b[2]).norm()) / 3.0;
}

}  // namespace

EpisodeResult run_episode(const EpisodeConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng world_rng = make_rng(seed, 1);
  Rng sensor_rng = make_rng(seed, 2);
  Rng planner_rng = make_rng(seed, 3);
  Rng grasp_rng = make_rng(seed, 4);
  const double dt = cfg.dt;
  const StageCoefficients& coeffs = cfg.stages[static_cast<std::size_t>(cfg.stage)];
  const TrackingConfig tracking_cfg{cfg.ekf_enabled, cfg.loss};

  EpisodeResult result;
  result.seed = seed;

  WorldState world;
  world.workspace = Workspace::preset(cfg.workspace);
  world.reachable = Workspace::preset(WorkspaceId::Extended);
  world.object_extent = cfg.object_extent;
  world.object_pose = sample_initial_object_pose(world.workspace, world_rng, cfg.initial_pose);
  world.gripper_pose = cfg.gripper_home;
  if (cfg.scene == SceneKind::Complex) world.obstacles = complex_scene_obstacles();
  world = init_motion(world, cfg.motion, world_rng);
  // Region the object can occupy; only escapes leave the sampling workspace.
  const Aabb object_support =
      cfg.motion.kind == MotionKind::Disruptive ? world.reachable.box() : world.workspace.box();

  // Initial registration from the home view seeds the filter, the tracker and
  // the grasp pool.
  const Pose camera0 = cfg.camera.camera_world(world.gripper_pose);
  const Pose object_cam0 = noisy_pose(pose_compose(pose_inverse(camera0), world.object_pose),
                                      cfg.sensor.reregister_sigma_pos, cfg.sensor.reregister_sigma_rot, sensor_rng);
  const Pose object0 = pose_compose(camera0, object_cam0);
  FilterState filter = ekf_init(object0, cfg.filter.p0_diag(), cfg.filter.noise(), 0.0);
  TrackerState tracker;
  tracker.last_tracked_pose = object_cam0;
  tracker.last_tracked_world = object0;
  tracker.last_measurement = PoseMeasurement::from_pose(object0, 0.0);
  tracker.emitted = object0;

  const GraspPool pool = generate_grasp_pool(object0, cfg.object_extent, cfg.pool.count, cfg.pool.finger_depth);
  std::vector<ObjGraspTransform> offsets;
  for (const auto& c : pool.candidates) offsets.push_back(compute_obj_grasp_transform(object0, c.pose));

  Pose estimate = object0;
  Phase phase = Phase::Standoff;
  GraspStage stage = GraspStage::Open;
  std::size_t selected = 0;
  bool contact_resolved = false;
  bool attempts_exhausted = false;
  int hold_ticks = 0;
  double lift_start_z = 0.0;
  Pose hold_offset;
  Vec3 backoff_goal = Vec3::Zero();
  std::optional<Pose> recovery_target;
  double next_replan = 0.0;
  TrackingFailureMonitor monitor(cfg.tracking_failure);
  TerminalFlags flags;

  std::vector<GraspCandidate> candidates(offsets.size());
  const int ticks = cfg.max_ticks();
  for (int tick = 0; tick < ticks; ++tick) {
    const bool holding = stage == GraspStage::Holding || stage == GraspStage::Lifting;

    // Perception: tracker, one-shot re-registration, filter.
    const Pose camera_world = cfg.camera.camera_world(world.gripper_pose);
    SensorFrame frame = sense(world, cfg.camera, tracker, cfg.sensor, sensor_rng);
    const bool can_reregister = cfg.ekf_enabled || cfg.baseline_reregistration;
    if (can_reregister && !frame.measurement && frame.visible && tracker.mode == TrackerMode::Reacquiring) {
      const Pose mean_cam = pose_compose(pose_inverse(camera_world), cfg.ekf_enabled ? filter.pose() : estimate);
      frame.measurement = reregister(world, cfg.camera, tracker, mean_cam, cfg.sensor, sensor_rng);
    }
    if (!frame.measurement) ++result.loss_ticks;
    const Pose prev_estimate = estimate;
    TrackingOutput tracked = tracking_step(frame, tracker, filter, camera_world, dt, tracking_cfg);
    tracker = tracked.tracker;
    filter = tracked.filter;
    estimate = tracked.estimate;

    // Grasp target re-projected through the current estimate.
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      candidates[i] = {grasp_pose(estimate, offsets[i]), pool.candidates[i].score};
    }
    if (stage == GraspStage::Open) selected = select_best_grasp(world.gripper_pose, candidates, cfg.selection);
    const Pose target = candidates[selected].pose;
    const Pose prev_target = grasp_pose(prev_estimate, offsets[selected]);

    Command cmd;
    bool premature_close = false;
    const bool started = world.time >= cfg.startup_delay - 1e-9;
    switch (stage) {
      case GraspStage::Open:
        if (!started) break;
        if (cfg.ekf_enabled && tracker.mode != TrackerMode::Locked) {
          // Keep the recovery view while re-registration is pending; replanning
          // then could turn the camera away from the reappeared object.
          const bool replan = tracker.mode == TrackerMode::Lost && world.time >= next_replan - 1e-9;
          if (!recovery_target || replan) {
            // A mean extrapolated out of the object's region (e.g. through a
            // wall bounce) is pulled back before aiming the camera.
            FilterState view = filter;
            view.x.segment<3>(kPos) = filter.position().cwiseMax(object_support.min).cwiseMin(object_support.max);
            recovery_target =
                recovery_viewpoint(view, cfg.camera, world.gripper_pose, planner_rng, world.obstacles, cfg.recovery)
                    .gripper;
            next_replan = world.time + cfg.recovery_replan_period;
          }
          cmd = recovery_pursue(*recovery_target, world.gripper_pose, cfg.gains);
          phase = Phase::Standoff;
        } else {
          recovery_target.reset();
          phase = next_phase(phase, world.gripper_pose, target, cfg.gains);
          const Observation obs = build_observation(target, world.gripper_pose, prev_target, true);
          cmd = pursue(obs, target, world.gripper_pose, phase, cfg.gains, dt);
          if (cmd.gripper_close && !attempts_exhausted) {
            stage = GraspStage::Closing;
            phase = Phase::Close;
            contact_resolved = false;
            world.grasp_engaged = true;
            ++result.attempts;
            if (tracker.mode != TrackerMode::Locked) {
              ++result.premature_grasps;
              premature_close = true;
            }
          } else {
            cmd.gripper_close = false;
          }
        }
        break;
      case GraspStage::Closing: {
        const Observation obs = build_observation(target, world.gripper_pose, prev_target, false);
        cmd = pursue(obs, target, world.gripper_pose, Phase::Close, cfg.gains, dt);
        cmd.gripper_close = true;
        break;
      }
      case GraspStage::Holding:
        cmd = hold_still();
        break;
      case GraspStage::Lifting:
        cmd = hold_still();
        cmd.twist.linear = world.gripper_pose.orientation.conjugate() * Vec3(0.0, 0.0, cfg.grasp.lift_speed);
        break;
      case GraspStage::Reopening:
        cmd = recovery_pursue({backoff_goal, world.gripper_pose.orientation}, world.gripper_pose, cfg.gains);
        break;
    }

    // Physics.
    world = gripper_step(world, cmd, dt, cfg.gripper);
    if (holding) {
      world.object_pose = pose_compose(world.gripper_pose, hold_offset);
      world.object_twist = Twist{};
      world.time += dt;
    } else {
      const Pose cam_now = cfg.camera.camera_world(world.gripper_pose);
      const auto& obstacles = world.obstacles;
      const InViewFn in_view = [&](const Vec3& p) { return visibility_test(cfg.camera, cam_now, p, obstacles); };
      world = object_step(world, cfg.motion, dt, world_rng, in_view);
    }

    // Grasp flow.
    bool grasped = false;
    const Pose grasp_true = grasp_pose(world.object_pose, offsets[selected]);
    switch (stage) {
      case GraspStage::Closing: {
        const double width = contact_width(world.object_pose, world.object_extent, grasp_true);
        if (!contact_resolved && world.gripper_width <= width) {
          contact_resolved = true;
          const AttemptOutcome attempt =
              attempt_grasp(world, grasp_true, cfg.grasp.tolerances, cfg.grasp.slip_prob, grasp_rng);
          if (attempt.success) {
            world.grip_contact_width = width;
            world.gripper_width = width;
            hold_offset = pose_compose(pose_inverse(world.gripper_pose), world.object_pose);
            hold_ticks = 0;
            stage = GraspStage::Holding;
          }
        } else if (contact_resolved && world.gripper_width <= 0.0) {
          if (detect_grasp_failure(world.gripper_width, cfg.grasp.closed_threshold)) {
            world.grasp_engaged = false;
            phase = Phase::Standoff;
            if (result.retries < cfg.grasp.max_retries) {
              ++result.retries;
              backoff_goal = world.gripper_pose.position - cfg.grasp.backoff * world.gripper_pose.axis(2);
              stage = GraspStage::Reopening;
            } else {
              attempts_exhausted = true;
              stage = GraspStage::Reopening;
              backoff_goal = world.gripper_pose.position - cfg.grasp.backoff * world.gripper_pose.axis(2);
            }
          }
        }
        break;
      }
      case GraspStage::Holding:
        if (++hold_ticks >= cfg.grasp.stabilization_ticks) {
          stage = GraspStage::Lifting;
          lift_start_z = world.gripper_pose.position.z();
        }
        break;
      case GraspStage::Lifting:
        if (world.gripper_pose.position.z() >= lift_start_z + cfg.grasp.lift_height - 1e-9) {
          flags.lifted = true;
          grasped = true;
        }
        break;
      case GraspStage::Reopening:
        if (world.gripper_width >= kMaxGripperWidth - 1e-12 &&
            (world.gripper_pose.position - backoff_goal).norm() < 0.01) {
          stage = GraspStage::Open;
        }
        break;
      case GraspStage::Open:
        break;
    }
    if (stage == GraspStage::Holding && hold_ticks == 0 && cfg.grasp.stabilization_ticks == 0) {
      stage = GraspStage::Lifting;
      lift_start_z = world.gripper_pose.position.z();
    }

    // Terminal checks.
    const Pose belief = cfg.ekf_enabled ? filter.pose() : estimate;
    flags.collided = collision_check(world, cfg.collision);
    const double error = (belief.position - world.object_pose.position).norm();
    result.max_tracking_error = std::max(result.max_tracking_error, error);
    if (!holding) monitor.update(error, dt);
    flags.tracking_failed = monitor.failed();

    TickEvents events;
    events.grasped = grasped && !flags.collided;
    events.collided = flags.collided;
    events.out_of_view = !frame.visible;
    events.premature_close = premature_close;
    events.keypoint_distance = mean_keypoint_distance(world.gripper_pose, grasp_true);
    events.over_distance = events.keypoint_distance > kOverDistanceThreshold;
    events.alignment_error = geodesic_angle(world.gripper_pose.orientation, grasp_true.orientation);
    events.action_magnitude = cmd.twist.linear.norm() + cmd.twist.angular.norm();
    const double reward = compute_reward(events, cfg.reward, coeffs);
    result.reward_total += reward;

    if (cfg.record_trace) {
      result.trace.push_back({tick, world.time, world.object_pose, estimate, belief, world.gripper_pose, world.gripper_width,
                              tracker.mode, phase, reward});
    }
    if (flags.collided || flags.tracking_failed || flags.lifted) break;
  }

  flags.timed_out = !(flags.collided || flags.tracking_failed || flags.lifted);
  result.outcome = classify_outcome(flags);
  result.end_time = world.time;
  if (result.outcome == Outcome::Success) result.time_to_grasp = world.time;
  result.reregistrations = tracker.reregistrations;
  return result;
}

}  // namespace dyngrasp
