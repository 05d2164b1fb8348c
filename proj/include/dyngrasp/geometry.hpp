#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <optional>

namespace dyngrasp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Unit quaternion. Eigen stores the coefficients in (x, y, z, w) order, which
/// is the order used by every serialized vector in this library (filter state,
/// measurements, traces).
using Quat = Eigen::Quaterniond;

/// Rigid transform: maps points from the child frame into the parent frame.
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  static Pose identity() { return {}; }
  static Pose from_translation(const Vec3& t) { return {t, Quat::Identity()}; }

  Mat3 rotation() const { return orientation.toRotationMatrix(); }
  Vec3 apply(const Vec3& point) const { return position + orientation * point; }
  /// Unit direction of the child frame's axis `i` expressed in the parent frame.
  Vec3 axis(int i) const { return orientation * Vec3::Unit(i); }
};

struct Twist {
  Vec3 linear = Vec3::Zero();   // m/s
  Vec3 angular = Vec3::Zero();  // rad/s
};

/// Throws std::invalid_argument when any coefficient is NaN or infinite.
void require_finite(const Vec3& v, const char* what);
void require_finite(const Quat& q, const char* what);
void require_finite(const Pose& p, const char* what);

/// First-order quaternion integration q + 0.5 dt q (x) [0, omega], followed by
/// normalization. `omega` is expressed in the body frame of `q`.
Quat quat_integrate(const Quat& q, const Vec3& omega, double dt);

Pose pose_compose(const Pose& a, const Pose& b);
Pose pose_inverse(const Pose& p);

/// Rotation angle in [0, pi] between two orientations; q and -q are the same
/// rotation.
double geodesic_angle(const Quat& qa, const Quat& qb);

/// Rotation vector (axis * angle, world frame) that takes `from` onto `to`,
/// using the shortest of the two double-cover representatives.
Vec3 rotation_error(const Quat& from, const Quat& to);

/// Exact exponential-map rotation for a constant body rate over dt.
Quat quat_exp_integrate(const Quat& q, const Vec3& omega, double dt);

/// Moves `from` toward `to` by at most `max_angle` radians along the geodesic.
Quat rotate_toward(const Quat& from, const Quat& to, double max_angle);

Quat normalized_quat(const Quat& q);

/// Axis-aligned box. Intersection tests use open-interval semantics: boxes
/// that only share a face do not intersect.
struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  static Aabb from_center(const Vec3& center, const Vec3& extent) {
    return {center - 0.5 * extent, center + 0.5 * extent};
  }
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
  bool contains(const Vec3& p, double tol = 0.0) const;
  bool overlaps(const Aabb& other) const;
  /// Smallest per-axis overlap length; <= 0 when the boxes are disjoint.
  double penetration(const Aabb& other) const;
};

/// World-axis bounding box of a box with the given extent attached at `pose`
/// (box center at pose.apply(center_offset)).
Aabb oriented_box_bounds(const Pose& pose, const Vec3& extent, const Vec3& center_offset = Vec3::Zero());

/// Box of the given extent centered at pose.apply(center_offset), axes along
/// the pose rotation.
struct OrientedBox {
  Vec3 center = Vec3::Zero();
  Mat3 axes = Mat3::Identity();  // columns are the box axes in world frame
  Vec3 half = Vec3::Zero();

  static OrientedBox attached(const Pose& pose, const Vec3& extent, const Vec3& center_offset = Vec3::Zero());
  static OrientedBox from_aabb(const Aabb& box);
};

/// Minimum overlap over the 15 separating axes of two boxes; <= 0 when they are
/// disjoint or only touch.
double box_penetration(const OrientedBox& a, const OrientedBox& b);

/// True iff the open segment a->b passes through the interior of `box`.
bool segment_intersects(const Vec3& a, const Vec3& b, const Aabb& box);

}  // namespace dyngrasp
