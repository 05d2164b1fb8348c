#pragma once

#include "dyngrasp/geometry.hpp"
#include "dyngrasp/random.hpp"

#include <Eigen/Dense>

namespace dyngrasp::testing {

inline Quat random_quat(Rng& rng) {
  Eigen::Vector4d v(standard_normal(rng), standard_normal(rng), standard_normal(rng), standard_normal(rng));
  v.normalize();
  return Quat(v(3), v(0), v(1), v(2));
}

inline Vec3 random_vec(Rng& rng, double scale = 1.0) {
  return scale * Vec3(standard_normal(rng), standard_normal(rng), standard_normal(rng));
}

inline Pose random_pose(Rng& rng, double scale = 1.0) { return {random_vec(rng, scale), random_quat(rng)}; }

/// Homogeneous matrix built straight from the rotation matrix; used as an
/// independent reference for the quaternion-based pose algebra.
inline Eigen::Matrix4d homogeneous(const Pose& p) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = p.orientation.toRotationMatrix();
  m.topRightCorner<3, 1>() = p.position;
  return m;
}

inline Quat yaw(double angle) { return Quat(Eigen::AngleAxisd(angle, Vec3::UnitZ())); }

}  // namespace dyngrasp::testing
