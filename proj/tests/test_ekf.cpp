#include "doctest.h"
#include "support.hpp"

#include "dyngrasp/ekf.hpp"
#include "dyngrasp/world.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

using namespace dyngrasp;
using namespace dyngrasp::testing;

namespace {

FilterState random_filter(Rng& rng) {
  FilterState s = ekf_init(random_pose(rng), StateVector::Constant(1e-4), NoiseConfig::defaults());
  s.x.segment<3>(kVel) = random_vec(rng, 0.1);
  s.x.segment<3>(kOmega) = random_vec(rng, 1.0);
  return s;
}

// Central differences of the unnormalized process map, one state coordinate
// at a time.
StateMatrix numeric_jacobian(const StateVector& x, double dt) {
  StateMatrix j;
  for (int i = 0; i < kStateDim; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
    StateVector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    j.col(i) = (propagate_mean(xp, dt) - propagate_mean(xm, dt)) / (2.0 * h);
  }
  return j;
}

double max_relative_error(const StateMatrix& a, const StateMatrix& b) {
  double worst = 0.0;
  for (int r = 0; r < kStateDim; ++r) {
    for (int c = 0; c < kStateDim; ++c) {
      const double scale = std::max(1.0, std::abs(b(r, c)));
      worst = std::max(worst, std::abs(a(r, c) - b(r, c)) / scale);
    }
  }
  return worst;
}

bool healthy(const FilterState& s, double tol = 1e-9) {
  const double asym = (s.P - s.P.transpose()).cwiseAbs().maxCoeff();
  const double min_eig = Eigen::SelfAdjointEigenSolver<StateMatrix>(s.P).eigenvalues().minCoeff();
  const double qnorm = std::abs(s.x.segment<4>(kQuat).norm() - 1.0);
  return asym <= tol && min_eig >= -tol && qnorm <= tol;
}

}  // namespace

TEST_CASE("ekf_init") {
  const FilterState s = ekf_init(Pose::identity(), StateVector::Constant(1e-4), NoiseConfig::defaults());
  CHECK(s.velocity().norm() == 0.0);
  CHECK(s.angular_velocity().norm() == 0.0);
  CHECK(s.P.isApprox(StateMatrix(StateVector::Constant(1e-4).asDiagonal())));
  CHECK(s.P == s.P.transpose());

  const FilterState t = ekf_init(Pose::from_translation(Vec3(0.5, 0.0, 0.3)), StateVector::Constant(1e-4),
                                 NoiseConfig::defaults());
  CHECK(t.position() == Vec3(0.5, 0.0, 0.3));

  CHECK_THROWS_AS(ekf_init(Pose::identity(), StateVector::Constant(-1.0), NoiseConfig::defaults()),
                  std::invalid_argument);
}

TEST_CASE("ekf_predict follows the constant-velocity model") {
  FilterState s = ekf_init(Pose::identity(), StateVector::Constant(1e-4), NoiseConfig::defaults());
  s.x.segment<3>(kVel) = Vec3(0.05, 0.0, 0.0);
  const FilterState p = ekf_predict(s, 0.1);
  CHECK((p.position() - Vec3(0.005, 0.0, 0.0)).norm() < 1e-15);
  CHECK(geodesic_angle(p.orientation(), Quat::Identity()) == 0.0);

  SUBCASE("at rest the mean is unchanged and P grows by exactly Q") {
    FilterState r = ekf_init(Pose::identity(), StateVector::Constant(1e-4), NoiseConfig::defaults());
    r.P.setZero();
    const FilterState q = ekf_predict(r, 0.05);
    CHECK(q.x == r.x);
    CHECK((q.P - r.noise.Q).cwiseAbs().maxCoeff() < 1e-18);
  }
  SUBCASE("rejects bad input") {
    CHECK_THROWS_AS(ekf_predict(s, 0.0), std::invalid_argument);
    FilterState bad = s;
    bad.x(0) = NAN;
    CHECK_THROWS_AS(ekf_predict(bad, 0.05), std::invalid_argument);
  }
}

TEST_CASE("process_jacobian structure") {
  Rng rng = make_rng(11);
  const FilterState s = random_filter(rng);
  CHECK(process_jacobian(s, 0.0) == StateMatrix::Identity());

  const StateMatrix f = process_jacobian(s, 0.05);
  CHECK(f.block<3, 3>(kPos, kPos) == Mat3::Identity());
  CHECK(f.block<3, 3>(kPos, kVel) == 0.05 * Mat3::Identity());
  CHECK(f.block<3, 3>(kVel, kVel) == Mat3::Identity());
  CHECK(f.block<3, 3>(kOmega, kOmega) == Mat3::Identity());

  SUBCASE("with zero rate J_q is the identity and J_w is half dt times the left-product matrix") {
    FilterState z = s;
    z.x.segment<3>(kOmega).setZero();
    const StateMatrix fz = process_jacobian(z, 0.05);
    CHECK(fz.block<4, 4>(kQuat, kQuat) == Eigen::Matrix4d::Identity());
    // Hand-written product q (x) [0, e_i] for each unit rate e_i.
    const Quat q = z.orientation();
    for (int i = 0; i < 3; ++i) {
      const Vec3 e = Vec3::Unit(i);
      const Quat prod = q * Quat(0.0, e.x(), e.y(), e.z());
      CHECK((fz.block<4, 1>(kQuat, kOmega + i) - 0.025 * prod.coeffs()).norm() < 1e-15);
    }
    CHECK(max_relative_error(fz, numeric_jacobian(z.x, 0.05)) < 1e-5);
  }
}

TEST_CASE("process_jacobian matches central finite differences") {
  Rng rng = make_rng(12);
  for (int i = 0; i < 100; ++i) {
    const FilterState s = random_filter(rng);
    const double dt = i % 2 ? 0.05 : uniform(rng, 0.001, 0.2);
    CHECK(max_relative_error(process_jacobian(s, dt), numeric_jacobian(s.x, dt)) < 1e-5);
  }
}

TEST_CASE("ekf_update limit cases") {
  FilterState s = ekf_init(Pose::identity(), StateVector::Constant(1e-2), NoiseConfig::defaults());
  const PoseMeasurement m = PoseMeasurement::from_pose(Pose::from_translation(Vec3(0.1, 0.0, 0.0)), 0.0);

  s.noise.R = NoiseConfig::diagonal_r(1e-12, 1e-12);
  CHECK((ekf_update(s, m).position() - Vec3(0.1, 0.0, 0.0)).norm() < 1e-6);

  s.noise.R = NoiseConfig::diagonal_r(1e12, 1e12);
  CHECK(ekf_update(s, m).position().norm() < 1e-6);

  SUBCASE("zero innovation leaves the mean unchanged") {
    Rng rng = make_rng(13);
    for (int i = 0; i < 50; ++i) {
      const FilterState f = random_filter(rng);
      const FilterState u = ekf_update(f, PoseMeasurement::from_pose(f.pose(), 0.0));
      CHECK((u.x - f.x).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
  SUBCASE("a measurement in the opposite hemisphere is the same rotation") {
    Rng rng = make_rng(14);
    const FilterState f = random_filter(rng);
    PoseMeasurement a = PoseMeasurement::from_pose(f.pose(), 0.0);
    a.z.head<3>() += Vec3(0.01, 0.0, 0.0);
    PoseMeasurement b = a;
    b.z.tail<4>() = -b.z.tail<4>();
    CHECK((ekf_update(f, a).x - ekf_update(f, b).x).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("degenerate noise is reported") {
    FilterState d = s;
    d.P.setZero();
    d.noise.R.setZero();
    CHECK_THROWS_AS(ekf_update(d, m), DegenerateNoiseError);
  }
}

TEST_CASE("position channel matches a hand-rolled scalar Kalman filter") {
  // With diagonal P and R the x-position coordinate of the full filter is an
  // independent one-dimensional filter: predict adds q, update uses
  // k = p / (p + r).
  Rng rng = make_rng(15);
  FilterState s = ekf_init(Pose::identity(), StateVector::Constant(0.01), NoiseConfig::defaults());
  s.P(kVel, kVel) = 0.0;  // static model so that predict is p += q
  s.noise.Q = NoiseConfig::diagonal_q(2e-4, 0.0, 1e-8, 0.0);
  const double q = 2e-4;
  double x = 0.0, p = 0.01;
  for (int i = 0; i < 100; ++i) {
    s = ekf_predict(s, 0.05);
    p += q;
    const double r = uniform(rng, 1e-4, 1e-2);
    s.noise.R = NoiseConfig::diagonal_r(r, 1e-4);
    const double z = uniform(rng, -1.0, 1.0);
    Pose meas = s.pose();
    meas.position.x() = z;
    s = ekf_update(s, PoseMeasurement::from_pose(meas, 0.0));
    const double k = p / (p + r);
    x += k * (z - x);
    p = (1.0 - k) * p;
    CHECK(std::abs(s.position().x() - x) < 1e-9);
    CHECK(std::abs(s.P(kPos, kPos) - p) < 1e-9);
  }
}

TEST_CASE("position-velocity channel matches a two-state filter written out by hand") {
  Rng rng = make_rng(16);
  const double dt = 0.05, qp = 1e-6, qv = 2.5e-5, r = 2.5e-5;
  FilterState s = ekf_init(Pose::identity(), StateVector::Constant(1e-3), NoiseConfig::defaults());
  s.noise.Q = NoiseConfig::diagonal_q(qp, qv, 1e-8, 2.5e-5);
  s.noise.R = NoiseConfig::diagonal_r(r, 1e-4);
  double x = 0.0, v = 0.0, pxx = 1e-3, pxv = 0.0, pvv = 1e-3;
  for (int i = 0; i < 100; ++i) {
    s = ekf_predict(s, dt);
    x += v * dt;
    const double nxx = pxx + 2.0 * dt * pxv + dt * dt * pvv + qp;
    const double nxv = pxv + dt * pvv;
    pvv += qv;
    pxx = nxx;
    pxv = nxv;

    const double z = 0.02 * i + 0.005 * standard_normal(rng);
    Pose meas = s.pose();
    meas.position.x() = z;
    s = ekf_update(s, PoseMeasurement::from_pose(meas, 0.0));
    const double sx = pxx + r;
    const double kx = pxx / sx, kv = pxv / sx;
    const double innov = z - x;
    x += kx * innov;
    v += kv * innov;
    const double uxx = (1.0 - kx) * pxx, uxv = (1.0 - kx) * pxv, uvv = pvv - kv * pxv;
    pxx = uxx;
    pxv = uxv;
    pvv = uvv;
    CHECK(std::abs(s.position().x() - x) < 1e-9);
    CHECK(std::abs(s.velocity().x() - v) < 1e-9);
    CHECK(std::abs(s.P(kPos, kVel) - pxv) < 1e-9);
  }
}

TEST_CASE("covariance stays symmetric and PSD over 1000 mixed steps") {
  Rng rng = make_rng(17);
  FilterState s = random_filter(rng);
  for (int i = 0; i < 1000; ++i) {
    if (bernoulli(rng, 0.5)) {
      s = ekf_predict(s, uniform(rng, 0.01, 0.1));
    } else {
      Pose meas = s.pose();
      meas.position += random_vec(rng, 0.01);
      meas.orientation = meas.orientation * Quat(Eigen::AngleAxisd(0.02, random_vec(rng).normalized()));
      s = ekf_update(s, PoseMeasurement::from_pose(meas, 0.0), uniform(rng, 0.5, 100.0));
    }
    REQUIRE(healthy(s));
  }
}

TEST_CASE("predict-only sequences never shrink the position uncertainty") {
  Rng rng = make_rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    FilterState s = random_filter(rng);
    double prev = s.position_covariance().trace();
    for (int i = 0; i < 100; ++i) {
      s = ekf_predict(s, 0.05);
      const double tr = s.position_covariance().trace();
      CHECK(tr > prev);
      prev = tr;
    }
  }
}

TEST_CASE("constant-velocity target: steady-state RMSE within the 3-sigma bound") {
  // Ground truth from the world simulation; 5 cm/s, sigma 5 mm, 20 Hz.
  Rng world_rng = make_rng(19, 1);
  Rng noise_rng = make_rng(19, 2);
  WorldState w;
  w.object_pose = Pose::from_translation(Vec3(0.3, -0.2, 0.3));
  w.object_twist.linear = Vec3(0.04, 0.03, 0.0);
  w.workspace.min = Vec3::Constant(-10.0);
  w.workspace.max = Vec3::Constant(10.0);
  w.reachable = w.workspace;
  const MotionPattern pattern = MotionPattern::constant_speed(0.05);

  FilterState s = ekf_init(w.object_pose, StateVector::Constant(1e-4), NoiseConfig::defaults());
  double sq = 0.0;
  int n = 0;
  for (int tick = 0; tick <= 700; ++tick) {
    w = object_step(w, pattern, 0.05, world_rng);
    s = ekf_predict(s, 0.05);
    Pose meas = w.object_pose;
    meas.position += random_vec(noise_rng, 0.005);
    s = ekf_update(s, PoseMeasurement::from_pose(meas, w.time));
    if (tick >= 200) {
      sq += (s.position() - w.object_pose.position).squaredNorm();
      ++n;
    }
  }
  CHECK(std::abs(w.object_twist.linear.norm() - 0.05) < 1e-12);
  CHECK(std::sqrt(sq / n) <= 0.015);
}

TEST_CASE("clamped_estimate") {
  FilterState s = ekf_init(Pose::from_translation(Vec3(0.1, 0.0, 0.0)), StateVector::Constant(1e-4),
                           NoiseConfig::defaults());
  const Pose prev = Pose::identity();
  const Pose out = clamped_estimate(s, prev, 0.05);
  CHECK((out.position - Vec3(0.0015, 0.0, 0.0)).norm() < 1e-15);

  s.x.segment<3>(kPos) = Vec3(0.001, 0.0, 0.0);
  CHECK(clamped_estimate(s, prev, 0.05).position == Vec3(0.001, 0.0, 0.0));

  SUBCASE("converges monotonically toward a fixed mean") {
    s.x.segment<3>(kPos) = Vec3(0.0, 0.1, 0.0);
    Pose e = prev;
    double prev_dist = 0.1;
    for (int i = 0; i < 100; ++i) {
      const Pose next = clamped_estimate(s, e, 0.05);
      CHECK((next.position - e.position).norm() <= 0.0015 + 1e-15);
      const double d = (next.position - s.position()).norm();
      CHECK(d <= prev_dist);
      prev_dist = d;
      e = next;
    }
    CHECK(prev_dist < 1e-12);
  }
  SUBCASE("rotation is clamped to the angular rate") {
    FilterState r = s;
    r.x.segment<4>(kQuat) = yaw(1.0).coeffs();
    const Pose o = clamped_estimate(r, prev, 0.05);
    CHECK(geodesic_angle(o.orientation, prev.orientation) == doctest::Approx(0.025));
  }
}
