#include "dyngrasp/ekf.hpp"

#include <cmath>

namespace dyngrasp {

namespace {

// q (x) [0, w] = Xi(q) * w, coefficients in (x, y, z, w) order.
Eigen::Matrix<double, 4, 3> rate_matrix(const Eigen::Vector4d& q) {
  const double x = q(0), y = q(1), z = q(2), w = q(3);
  Eigen::Matrix<double, 4, 3> m;
  m << w, -z, y,
       z, w, -x,
      -y, x, w,
      -x, -y, -z;
  return m;
}

// q (x) [0, w] = Omega(w) * q, coefficients in (x, y, z, w) order.
Eigen::Matrix4d right_product_matrix(const Vec3& w) {
  Eigen::Matrix4d m;
  m << 0.0, w.z(), -w.y(), w.x(),
      -w.z(), 0.0, w.x(), w.y(),
       w.y(), -w.x(), 0.0, w.z(),
      -w.x(), -w.y(), -w.z(), 0.0;
  return m;
}

void normalize_quat_block(StateVector& x) {
  const double n = x.segment<4>(kQuat).norm();
  if (!(n > 0.0)) throw std::invalid_argument("filter quaternion collapsed to zero");
  x.segment<4>(kQuat) /= n;
}

void symmetrize(StateMatrix& p) { p = 0.5 * (p + p.transpose()).eval(); }

void require_finite_state(const FilterState& s, const char* what) {
  if (!s.x.allFinite() || !s.P.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite filter state");
}

}  // namespace

StateMatrix NoiseConfig::diagonal_q(double pos, double vel, double quat, double omega) {
  StateVector d;
  d << Vec3::Constant(pos), Vec3::Constant(vel), Eigen::Vector4d::Constant(quat), Vec3::Constant(omega);
  return d.asDiagonal();
}

MeasMatrix NoiseConfig::diagonal_r(double pos, double quat) {
  MeasVector d;
  d << Vec3::Constant(pos), Eigen::Vector4d::Constant(quat);
  return d.asDiagonal();
}

NoiseConfig NoiseConfig::defaults() {
  return {diagonal_q(1e-6, 2.5e-5, 1e-8, 2.5e-5), diagonal_r(2.5e-5, 1e-4)};
}

PoseMeasurement PoseMeasurement::from_pose(const Pose& pose, double timestamp) {
  PoseMeasurement m;
  m.z.head<3>() = pose.position;
  m.z.tail<4>() = normalized_quat(pose.orientation).coeffs();
  m.timestamp = timestamp;
  return m;
}

FilterState ekf_init(const Pose& pose0, const StateVector& p0_diag, const NoiseConfig& noise, double time) {
  require_finite(pose0, "ekf_init");
  if (!p0_diag.allFinite() || (p0_diag.array() < 0.0).any()) {
    throw std::invalid_argument("ekf_init: initial covariance diagonal must be finite and nonnegative");
  }
  FilterState s;
  s.x.segment<3>(kPos) = pose0.position;
  s.x.segment<4>(kQuat) = normalized_quat(pose0.orientation).coeffs();
  s.P = p0_diag.asDiagonal();
  s.noise = noise;
  s.last_update_time = time;
  return s;
}

StateVector propagate_mean(const StateVector& x, double dt) {
  StateVector out = x;
  out.segment<3>(kPos) += dt * x.segment<3>(kVel);
  const Eigen::Vector4d q = x.segment<4>(kQuat);
  out.segment<4>(kQuat) = q + 0.5 * dt * rate_matrix(q) * x.segment<3>(kOmega);
  return out;
}

StateMatrix process_jacobian(const FilterState& state, double dt) {
  StateMatrix f = StateMatrix::Identity();
  f.block<3, 3>(kPos, kVel) = dt * Mat3::Identity();
  const Eigen::Vector4d q = state.x.segment<4>(kQuat);
  f.block<4, 4>(kQuat, kQuat) += 0.5 * dt * right_product_matrix(state.angular_velocity());
  f.block<4, 3>(kQuat, kOmega) = 0.5 * dt * rate_matrix(q);
  return f;
}

FilterState ekf_predict(const FilterState& state, double dt) {
  require_finite_state(state, "ekf_predict");
  if (!std::isfinite(dt) || !(dt > 0.0)) throw std::invalid_argument("ekf_predict: dt must be > 0");

  const StateMatrix f = process_jacobian(state, dt);
  FilterState out = state;
  out.x = propagate_mean(state.x, dt);
  normalize_quat_block(out.x);
  out.P = f * state.P * f.transpose() + state.noise.Q;
  symmetrize(out.P);
  out.last_update_time = state.last_update_time + dt;
  return out;
}

MeasJacobian measurement_jacobian() {
  MeasJacobian h = MeasJacobian::Zero();
  h.block<3, 3>(0, kPos) = Mat3::Identity();
  h.block<4, 4>(3, kQuat) = Eigen::Matrix4d::Identity();
  return h;
}

FilterState ekf_update(const FilterState& state, const PoseMeasurement& m, double r_scale) {
  require_finite_state(state, "ekf_update");
  if (!m.z.allFinite()) throw std::invalid_argument("ekf_update: non-finite measurement");

  const MeasJacobian h = measurement_jacobian();
  MeasVector z = m.z;
  if (z.tail<4>().dot(state.x.segment<4>(kQuat)) < 0.0) z.tail<4>() = -z.tail<4>();

  const MeasVector y = z - h * state.x;
  const MeasMatrix s = h * state.P * h.transpose() + r_scale * state.noise.R;
  const Eigen::LLT<MeasMatrix> llt(s);
  if (llt.info() != Eigen::Success) {
    throw DegenerateNoiseError("ekf_update: innovation covariance is not positive definite");
  }
  // K = P H^T S^-1, computed as (S^-1 H P)^T since S and P are symmetric.
  const Eigen::Matrix<double, kStateDim, kMeasDim> k = llt.solve(h * state.P).transpose();

  FilterState out = state;
  out.x = state.x + k * y;
  normalize_quat_block(out.x);
  // Joseph form: algebraically (I - KH) P for the optimal gain, but keeps P
  // symmetric positive semidefinite under round-off.
  const StateMatrix ikh = StateMatrix::Identity() - k * h;
  out.P = ikh * state.P * ikh.transpose() + k * (r_scale * state.noise.R) * k.transpose();
  symmetrize(out.P);
  out.last_update_time = m.timestamp;
  return out;
}

Pose clamped_estimate(const FilterState& state, const Pose& prev_emitted, double dt, const LossHandling& limits) {
  const Pose mean = state.pose();
  Pose out;
  const Vec3 delta = mean.position - prev_emitted.position;
  const double max_step = limits.clamp_linear_speed * dt;
  const double dist = delta.norm();
  out.position = dist <= max_step ? mean.position : Vec3(prev_emitted.position + delta * (max_step / dist));
  out.orientation = rotate_toward(prev_emitted.orientation, mean.orientation, limits.clamp_angular_speed * dt);
  return out;
}

}  // namespace dyngrasp
