#pragma once

#include "dyngrasp/geometry.hpp"

#include <stdexcept>

namespace dyngrasp {

// State layout: [p(3) m, v(3) m/s, q(4) (x, y, z, w), omega(3) rad/s].
inline constexpr int kStateDim = 13;
inline constexpr int kMeasDim = 7;
inline constexpr int kPos = 0;
inline constexpr int kVel = 3;
inline constexpr int kQuat = 6;
inline constexpr int kOmega = 10;

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using MeasVector = Eigen::Matrix<double, kMeasDim, 1>;
using MeasMatrix = Eigen::Matrix<double, kMeasDim, kMeasDim>;
using MeasJacobian = Eigen::Matrix<double, kMeasDim, kStateDim>;

/// Raised when the innovation covariance cannot be factored, which only
/// happens with a degenerate (non positive-definite) measurement noise.
class DegenerateNoiseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NoiseConfig {
  StateMatrix Q = StateMatrix::Zero();  // added once per predict
  MeasMatrix R = MeasMatrix::Zero();

  /// Diagonal process noise from per-block variances.
  static StateMatrix diagonal_q(double pos, double vel, double quat, double omega);
  static MeasMatrix diagonal_r(double pos, double quat);
  static NoiseConfig defaults();
};

struct FilterState {
  StateVector x = StateVector::Zero();
  StateMatrix P = StateMatrix::Zero();
  NoiseConfig noise;
  double last_update_time = 0.0;

  Vec3 position() const { return x.segment<3>(kPos); }
  Vec3 velocity() const { return x.segment<3>(kVel); }
  Quat orientation() const { return Quat(x(kQuat + 3), x(kQuat), x(kQuat + 1), x(kQuat + 2)); }
  Vec3 angular_velocity() const { return x.segment<3>(kOmega); }
  Pose pose() const { return {position(), orientation()}; }
  Mat3 position_covariance() const { return P.block<3, 3>(kPos, kPos); }
};

struct PoseMeasurement {
  MeasVector z = MeasVector::Zero();  // [p(3), q(4) (x, y, z, w)]
  double timestamp = 0.0;

  static PoseMeasurement from_pose(const Pose& pose, double timestamp);
  Pose pose() const { return {z.head<3>(), Quat(z(6), z(3), z(4), z(5))}; }
};

/// Behavior while no fresh measurement is available and the bound on how fast
/// the controller-facing estimate may move.
struct LossHandling {
  bool refeed_last_measurement = true;
  double refeed_inflation = 1.5;     // R multiplier per consecutive loss tick
  double refeed_inflation_cap = 1e6;
  double clamp_linear_speed = 0.03;  // m/s
  double clamp_angular_speed = 0.5;  // rad/s
};

FilterState ekf_init(const Pose& pose0, const StateVector& p0_diag, const NoiseConfig& noise, double time = 0.0);

/// Mean propagation without the final quaternion normalization; this is the
/// map whose Jacobian process_jacobian() returns.
StateVector propagate_mean(const StateVector& x, double dt);

StateMatrix process_jacobian(const FilterState& state, double dt);

FilterState ekf_predict(const FilterState& state, double dt);

/// Standard EKF correction with a full pose measurement. The measurement
/// quaternion is flipped into the prior's hemisphere before forming the
/// residual. `r_scale` multiplies R (used when re-feeding stale observations).
FilterState ekf_update(const FilterState& state, const PoseMeasurement& m, double r_scale = 1.0);

MeasJacobian measurement_jacobian();

/// EKF mean pose, rate-limited relative to the previously emitted pose.
Pose clamped_estimate(const FilterState& state, const Pose& prev_emitted, double dt, const LossHandling& limits = {});

}  // namespace dyngrasp
