#include "dyngrasp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dyngrasp {

void require_finite(const Vec3& v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite vector");
}

void require_finite(const Quat& q, const char* what) {
  if (!q.coeffs().allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite quaternion");
}

void require_finite(const Pose& p, const char* what) {
  require_finite(p.position, what);
  require_finite(p.orientation, what);
}

Quat normalized_quat(const Quat& q) {
  const double n = q.norm();
  if (!(n > 0.0)) throw std::invalid_argument("cannot normalize a zero quaternion");
  return Quat(q.coeffs() / n);
}

Quat quat_integrate(const Quat& q, const Vec3& omega, double dt) {
  require_finite(q, "quat_integrate");
  require_finite(omega, "quat_integrate");
  if (!std::isfinite(dt) || dt < 0.0) throw std::invalid_argument("quat_integrate: dt must be finite and >= 0");

  const Quat rate = q * Quat(0.0, omega.x(), omega.y(), omega.z());
  return normalized_quat(Quat(q.coeffs() + 0.5 * dt * rate.coeffs()));
}

Quat quat_exp_integrate(const Quat& q, const Vec3& omega, double dt) {
  const double angle = omega.norm() * dt;
  if (angle == 0.0) return q;
  return normalized_quat(q * Quat(Eigen::AngleAxisd(angle, omega.normalized())));
}

Pose pose_compose(const Pose& a, const Pose& b) {
  require_finite(a, "pose_compose");
  require_finite(b, "pose_compose");
  return {a.position + a.orientation * b.position, normalized_quat(a.orientation * b.orientation)};
}

Pose pose_inverse(const Pose& p) {
  require_finite(p, "pose_inverse");
  const Quat inv = p.orientation.conjugate();
  return {-(inv * p.position), inv};
}

double geodesic_angle(const Quat& qa, const Quat& qb) {
  // 2 * atan2(|v|, |w|) of the relative rotation keeps precision near zero,
  // unlike 2 * acos(|<qa, qb>|).
  const Quat rel = qa.conjugate() * qb;
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

Vec3 rotation_error(const Quat& from, const Quat& to) {
  Quat rel = to * from.conjugate();
  if (rel.w() < 0.0) rel.coeffs() = -rel.coeffs();
  const double s = rel.vec().norm();
  if (s < 1e-12) return 2.0 * rel.vec();
  const double angle = 2.0 * std::atan2(s, rel.w());
  return rel.vec() / s * angle;
}

Quat rotate_toward(const Quat& from, const Quat& to, double max_angle) {
  const double angle = geodesic_angle(from, to);
  if (angle <= max_angle || angle == 0.0) return to;
  Quat target = to;
  if (from.coeffs().dot(to.coeffs()) < 0.0) target.coeffs() = -target.coeffs();
  return normalized_quat(from.slerp(max_angle / angle, target));
}

bool Aabb::contains(const Vec3& p, double tol) const {
  return ((p.array() >= min.array() - tol) && (p.array() <= max.array() + tol)).all();
}

bool Aabb::overlaps(const Aabb& other) const { return penetration(other) > 0.0; }

double Aabb::penetration(const Aabb& other) const {
  const Vec3 lo = min.cwiseMax(other.min);
  const Vec3 hi = max.cwiseMin(other.max);
  return (hi - lo).minCoeff();
}

Aabb oriented_box_bounds(const Pose& pose, const Vec3& extent, const Vec3& center_offset) {
  const Mat3 r = pose.rotation();
  const Vec3 half = r.cwiseAbs() * (0.5 * extent);
  const Vec3 c = pose.apply(center_offset);
  return {c - half, c + half};
}

OrientedBox OrientedBox::attached(const Pose& pose, const Vec3& extent, const Vec3& center_offset) {
  return {pose.apply(center_offset), pose.rotation(), 0.5 * extent};
}

OrientedBox OrientedBox::from_aabb(const Aabb& box) { return {box.center(), Mat3::Identity(), 0.5 * box.extent()}; }

double box_penetration(const OrientedBox& a, const OrientedBox& b) {
  const Vec3 d = b.center - a.center;
  double depth = std::numeric_limits<double>::infinity();
  auto test = [&](const Vec3& axis) {
    const double len = axis.norm();
    if (len < 1e-9) return;  // parallel edges; covered by the face axes
    const Vec3 n = axis / len;
    const double ra = (a.axes.transpose() * n).cwiseAbs().dot(a.half);
    const double rb = (b.axes.transpose() * n).cwiseAbs().dot(b.half);
    depth = std::min(depth, ra + rb - std::abs(d.dot(n)));
  };
  for (int i = 0; i < 3; ++i) {
    test(a.axes.col(i));
    test(b.axes.col(i));
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) test(a.axes.col(i).cross(b.axes.col(j)));
  }
  return depth;
}

bool segment_intersects(const Vec3& a, const Vec3& b, const Aabb& box) {
  const Vec3 d = b - a;
  double t_enter = 0.0;
  double t_exit = 1.0;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (!(a[i] > box.min[i] && a[i] < box.max[i])) return false;
      continue;
    }
    double t0 = (box.min[i] - a[i]) / d[i];
    double t1 = (box.max[i] - a[i]) / d[i];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (!(t_enter < t_exit)) return false;
  }
  return t_enter < t_exit;
}

}  // namespace dyngrasp
