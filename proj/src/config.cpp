#include "dyngrasp/config.hpp"

#include "json.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dyngrasp {

using nlohmann::json;

namespace {

// Binds struct fields to a JSON object in either direction, so one function
// per struct describes both the reader and the writer.
class Binder {
 public:
  static Binder reader(const json& in, std::string path) { return Binder(&in, nullptr, std::move(path)); }
  static Binder writer(json& out) { return Binder(nullptr, &out, ""); }

  template <class T>
  void value(const char* key, T& v) {
    if (out_) {
      (*out_)[key] = v;
      return;
    }
    if (!take(key)) return;
    try {
      v = in_->at(key).get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("config key '" + where(key) + "' has the wrong type");
    }
  }

  void angle(const char* key, double& radians) {
    double deg = rad_to_deg(radians);
    value(key, deg);
    if (!out_) radians = deg_to_rad(deg);
  }

  void vec3(const char* key, Vec3& v) {
    std::array<double, 3> a{v.x(), v.y(), v.z()};
    value(key, a);
    if (!out_) v = Vec3(a[0], a[1], a[2]);
  }

  void pose(const char* key, Pose& p) {
    object(key, [&](Binder& b) {
      b.vec3("position", p.position);
      std::array<double, 4> q{p.orientation.x(), p.orientation.y(), p.orientation.z(), p.orientation.w()};
      b.value("orientation_xyzw", q);
      if (!b.out_) p.orientation = normalized_quat(Quat(q[3], q[0], q[1], q[2]));
    });
  }

  template <class E, class ToStr, class FromStr>
  void enumeration(const char* key, E& e, ToStr to_str, FromStr from_str) {
    std::string s = to_str(e);
    value(key, s);
    if (!out_) e = from_str(s);
  }

  template <class Fn>
  void object(const char* key, Fn&& fn) {
    if (out_) {
      json child = json::object();
      Binder b(nullptr, &child, "");
      fn(b);
      (*out_)[key] = std::move(child);
      return;
    }
    if (!take(key)) return;
    const json& child = in_->at(key);
    if (!child.is_object()) throw std::invalid_argument("config key '" + where(key) + "' must be an object");
    Binder b(&child, nullptr, where(key));
    fn(b);
    b.finish();
  }

  template <class T, class Fn>
  void array(const char* key, std::vector<T>& items, Fn&& fn) {
    if (out_) {
      json arr = json::array();
      for (auto& item : items) {
        json child = json::object();
        Binder b(nullptr, &child, "");
        fn(b, item);
        arr.push_back(std::move(child));
      }
      (*out_)[key] = std::move(arr);
      return;
    }
    if (!take(key)) return;
    const json& arr = in_->at(key);
    if (!arr.is_array()) throw std::invalid_argument("config key '" + where(key) + "' must be an array");
    std::vector<T> parsed;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_object()) throw std::invalid_argument("config key '" + where(key) + "' must hold objects");
      T item = i < items.size() ? items[i] : T{};
      Binder b(&arr[i], nullptr, where(key) + "[" + std::to_string(i) + "]");
      fn(b, item);
      b.finish();
      parsed.push_back(item);
    }
    items = std::move(parsed);
  }

  void finish() const {
    if (!in_) return;
    for (const auto& [key, _] : in_->items()) {
      if (!seen_.count(key)) throw std::invalid_argument("unknown config key '" + where(key.c_str()) + "'");
    }
  }

 private:
  Binder(const json* in, json* out, std::string path) : in_(in), out_(out), path_(std::move(path)) {}

  bool take(const char* key) {
    if (!in_->contains(key)) return false;
    seen_.insert(key);
    return true;
  }
  std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* in_;
  json* out_;
  std::string path_;
  std::set<std::string> seen_;
};

void bind(Binder& b, MotionPattern& m) {
  b.enumeration("kind", m.kind, [](MotionKind k) { return to_string(k); }, motion_kind_from_string);
  b.value("speed_min", m.speed_min);
  b.value("speed_max", m.speed_max);
  b.angle("rot_step_max_deg", m.rot_step_max);
  b.value("segment_min_s", m.segment_min_s);
  b.value("segment_max_s", m.segment_max_s);
  b.value("velocity_time_constant", m.velocity_time_constant);
  b.value("jitter", m.jitter);
  b.value("disrupt_prob", m.disrupt_prob);
  b.value("disrupt_speed_min", m.disrupt_speed_min);
  b.value("disrupt_speed_max", m.disrupt_speed_max);
  b.value("trigger_min_s", m.trigger_min_s);
  b.value("trigger_max_s", m.trigger_max_s);
  b.value("trigger_range", m.trigger_range);
  b.value("escape_distance_min", m.escape_distance_min);
  b.value("escape_distance_max", m.escape_distance_max);
  b.value("escape_max_duration", m.escape_max_duration);
}

void bind(Binder& b, CameraModel& c) {
  b.pose("mount_offset", c.mount_offset);
  b.angle("hfov_deg", c.hfov);
  b.angle("vfov_deg", c.vfov);
  b.value("min_range", c.min_range);
  b.value("max_range", c.max_range);
}

void bind(Binder& b, SensorNoise& s) {
  b.value("sigma_pos", s.sigma_pos);
  b.angle("sigma_rot_deg", s.sigma_rot);
  b.value("lock_translation", s.lock_translation);
  b.angle("lock_rotation_deg", s.lock_rotation);
  b.value("reregister_latency", s.reregister_latency);
  b.value("reregister_sigma_pos", s.reregister_sigma_pos);
  b.angle("reregister_sigma_rot_deg", s.reregister_sigma_rot);
}

void bind(Binder& b, FilterNoiseConfig& f) {
  b.value("q_pos", f.q_pos);
  b.value("q_vel", f.q_vel);
  b.value("q_quat", f.q_quat);
  b.value("q_omega", f.q_omega);
  b.value("r_pos", f.r_pos);
  b.value("r_quat", f.r_quat);
  b.value("p0", f.p0);
}

void bind(Binder& b, LossHandling& l) {
  b.value("refeed_last_measurement", l.refeed_last_measurement);
  b.value("refeed_inflation", l.refeed_inflation);
  b.value("refeed_inflation_cap", l.refeed_inflation_cap);
  b.value("clamp_linear_speed", l.clamp_linear_speed);
  b.value("clamp_angular_speed", l.clamp_angular_speed);
}

struct Ring {
  double elevation = 0.0;
  int count = 0;
};

void bind(Binder& b, RecoveryConfig& r) {
  b.value("n_samples", r.n_samples);
  b.value("radius", r.radius);
  std::vector<Ring> rings;
  for (const auto& [e, c] : r.rings) rings.push_back({e, c});
  b.array("rings", rings, [](Binder& rb, Ring& ring) {
    rb.angle("elevation_deg", ring.elevation);
    rb.value("count", ring.count);
  });
  r.rings.clear();
  for (const auto& ring : rings) r.rings.emplace_back(ring.elevation, ring.count);
}

void bind(Binder& b, ControlGains& g) {
  b.value("k_p", g.k_p);
  b.value("k_r", g.k_r);
  b.value("max_linear", g.max_linear);
  b.value("max_angular", g.max_angular);
  b.value("standoff", g.standoff);
  b.angle("align_threshold_deg", g.align_threshold);
  b.angle("realign_threshold_deg", g.realign_threshold);
  b.value("k_ff", g.k_ff);
  b.value("eps_pos", g.eps_pos);
  b.angle("eps_ang_deg", g.eps_ang);
}

void bind(Binder& b, GraspFlowConfig& g) {
  b.value("tolerance_pos", g.tolerances.position);
  b.angle("tolerance_ang_deg", g.tolerances.angle);
  b.value("slip_prob", g.slip_prob);
  b.value("max_retries", g.max_retries);
  b.value("stabilization_ticks", g.stabilization_ticks);
  b.value("lift_height", g.lift_height);
  b.value("lift_speed", g.lift_speed);
  b.value("backoff", g.backoff);
  b.value("closed_threshold", g.closed_threshold);
}

void bind(Binder& b, RewardWeights& w) {
  b.value("grasp", w.grasp);
  b.value("dist", w.dist);
  b.value("dist_over", w.dist_over);
  b.value("align", w.align);
  b.value("collision", w.collision);
  b.value("view", w.view);
  b.value("gripper", w.gripper);
  b.value("move", w.move);
}

void bind(Binder& b, StageCoefficients& s) {
  b.value("stage", s.stage);
  b.value("dist", s.dist);
  b.value("dist_over", s.dist_over);
  b.value("align", s.align);
  b.value("collision", s.collision);
  b.value("view", s.view);
  b.value("gripper", s.gripper);
  b.value("move", s.move);
  b.value("strict_view_reset", s.strict_view_reset);
  b.value("max_object_speed", s.max_object_speed);
  b.value("initial_object_speed", s.initial_object_speed);
  b.value("randomized_start", s.randomized_start);
  b.value("se3_motion", s.se3_motion);
  b.value("control_period", s.control_period);
}

void bind(Binder& b, EpisodeConfig& c) {
  b.enumeration("workspace", c.workspace, [](WorkspaceId id) { return to_string(id); }, workspace_from_string);
  b.object("motion", [&](Binder& s) { bind(s, c.motion); });
  b.value("t_max", c.t_max);
  b.value("dt", c.dt);
  b.value("ekf_enabled", c.ekf_enabled);
  b.value("baseline_reregistration", c.baseline_reregistration);
  b.value("stage", c.stage);
  b.enumeration("scene", c.scene, [](SceneKind k) { return to_string(k); }, scene_kind_from_string);
  b.value("startup_delay", c.startup_delay);
  b.value("recovery_replan_period", c.recovery_replan_period);
  b.object("initial_pose", [&](Binder& s) {
    s.angle("yaw_range_deg", c.initial_pose.yaw_range);
    s.angle("tilt_range_deg", c.initial_pose.tilt_range);
  });
  b.vec3("object_extent", c.object_extent);
  b.pose("gripper_home", c.gripper_home);
  b.object("camera", [&](Binder& s) { bind(s, c.camera); });
  b.object("sensor", [&](Binder& s) { bind(s, c.sensor); });
  b.object("filter", [&](Binder& s) { bind(s, c.filter); });
  b.object("loss", [&](Binder& s) { bind(s, c.loss); });
  b.object("recovery", [&](Binder& s) { bind(s, c.recovery); });
  b.object("grasp_pool", [&](Binder& s) {
    s.value("count", c.pool.count);
    s.value("finger_depth", c.pool.finger_depth);
  });
  b.object("selection", [&](Binder& s) {
    s.value("translation", c.selection.translation);
    s.value("rotation", c.selection.rotation);
    s.value("score", c.selection.score);
  });
  b.object("control", [&](Binder& s) { bind(s, c.gains); });
  b.object("gripper", [&](Binder& s) {
    s.value("max_linear", c.gripper.max_linear);
    s.value("max_angular", c.gripper.max_angular);
    s.value("width_rate", c.gripper.width_rate);
  });
  b.object("collision", [&](Binder& s) {
    s.vec3("gripper_box_extent", c.collision.gripper_box_extent);
    s.vec3("gripper_box_offset", c.collision.gripper_box_offset);
    s.value("object_penetration_tol", c.collision.object_penetration_tol);
  });
  b.object("grasp", [&](Binder& s) { bind(s, c.grasp); });
  b.object("tracking_failure", [&](Binder& s) {
    s.value("distance", c.tracking_failure.distance);
    s.value("duration", c.tracking_failure.duration);
  });
  b.object("reward", [&](Binder& s) { bind(s, c.reward); });
  std::vector<StageCoefficients> stages(c.stages.begin(), c.stages.end());
  b.array("stages", stages, [](Binder& s, StageCoefficients& row) { bind(s, row); });
  if (stages.size() != c.stages.size()) {
    throw std::invalid_argument("config key 'stages' must list exactly " + std::to_string(kNumStages) + " stages");
  }
  std::copy(stages.begin(), stages.end(), c.stages.begin());
}

}  // namespace

EpisodeConfig config_from_json(const std::string& text, const EpisodeConfig& defaults) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config root must be a JSON object");
  EpisodeConfig cfg = defaults;
  Binder b = Binder::reader(doc, "");
  bind(b, cfg);
  b.finish();
  cfg.validate();
  return cfg;
}

EpisodeConfig load_config(const std::filesystem::path& path, const EpisodeConfig& defaults) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return config_from_json(text.str(), defaults);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::string config_to_json(const EpisodeConfig& config) {
  EpisodeConfig copy = config;
  json doc = json::object();
  Binder b = Binder::writer(doc);
  bind(b, copy);
  return doc.dump(2) + "\n";
}

}  // namespace dyngrasp
