#include "doctest.h"
#include "support.hpp"

#include "dyngrasp/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace dyngrasp;
using namespace dyngrasp::testing;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("quat_integrate with zero rate leaves the orientation unchanged") {
  CHECK(geodesic_angle(quat_integrate(Quat::Identity(), Vec3::Zero(), 0.05), Quat::Identity()) == 0.0);
  Rng rng = make_rng(1);
  for (int i = 0; i < 50; ++i) {
    const Quat q = random_quat(rng);
    const Quat r = quat_integrate(q, Vec3::Zero(), 0.05);
    CHECK(r.coeffs().isApprox(q.coeffs(), 1e-12));
  }
}

TEST_CASE("quat_integrate: 200 small steps about z match the closed-form rotation") {
  Quat q = Quat::Identity();
  for (int i = 0; i < 200; ++i) q = quat_integrate(q, Vec3(0.0, 0.0, 2.0 * kPi), 0.0005);
  const Quat exact(Eigen::AngleAxisd(0.2 * kPi, Vec3::UnitZ()));
  CHECK(geodesic_angle(q, exact) < 1e-3);
  CHECK(std::abs(q.norm() - 1.0) < 1e-12);
}

TEST_CASE("quat_integrate error against the exponential map stays within the first-order bound") {
  Rng rng = make_rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Quat q = random_quat(rng);
    Vec3 w = random_vec(rng);
    const double dt = 0.05;
    const double max_angle = uniform(rng, 1e-4, 0.1);
    w *= max_angle / (w.norm() * dt);
    // Exact rotation for a constant body rate: q * exp(w dt).
    const Quat exact = q * Quat(Eigen::AngleAxisd(w.norm() * dt, w.normalized()));
    const double theta = w.norm() * dt;
    CHECK(geodesic_angle(quat_integrate(q, w, dt), exact) <= 2.0 * 0.5 * theta * theta);
  }
}

TEST_CASE("quat_integrate rejects non-finite input") {
  CHECK_THROWS_AS(quat_integrate(Quat::Identity(), Vec3(NAN, 0, 0), 0.05), std::invalid_argument);
  CHECK_THROWS_AS(quat_integrate(Quat(NAN, 0, 0, 0), Vec3::Zero(), 0.05), std::invalid_argument);
  CHECK_THROWS_AS(quat_integrate(Quat::Identity(), Vec3::Zero(), -0.01), std::invalid_argument);
}

TEST_CASE("pose_compose and pose_inverse basic cases") {
  Rng rng = make_rng(3);
  const Pose p = random_pose(rng);
  const Pose a = pose_compose(Pose::identity(), p);
  CHECK((a.position - p.position).norm() < 1e-12);
  CHECK(geodesic_angle(a.orientation, p.orientation) < 1e-12);

  const Pose e = pose_compose(p, pose_inverse(p));
  CHECK(e.position.norm() < 1e-9);
  CHECK(geodesic_angle(e.orientation, Quat::Identity()) < 1e-9);

  const Pose inv_id = pose_inverse(Pose::identity());
  CHECK(inv_id.position.norm() == 0.0);
  CHECK(geodesic_angle(inv_id.orientation, Quat::Identity()) == 0.0);

  const Pose t = pose_inverse(Pose::from_translation(Vec3(0.3, 0.0, 0.0)));
  CHECK((t.position - Vec3(-0.3, 0.0, 0.0)).norm() < 1e-15);
}

TEST_CASE("translation, 90 degree yaw, translation lands at (1, 1, 0)") {
  // Hand computation: R_z(90) maps (1, 0, 0) to (0, 1, 0), so the second
  // translation moves along world y.
  const Pose t1 = Pose::from_translation(Vec3(1.0, 0.0, 0.0));
  const Pose r{Vec3::Zero(), yaw(kPi / 2.0)};
  const Pose out = pose_compose(pose_compose(t1, r), t1);
  CHECK((out.position - Vec3(1.0, 1.0, 0.0)).norm() < 1e-9);
}

TEST_CASE("pose algebra matches homogeneous matrices and forms a group") {
  Rng rng = make_rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Pose a = random_pose(rng);
    const Pose b = random_pose(rng);
    const Pose c = random_pose(rng);

    const Eigen::Matrix4d ab = homogeneous(a) * homogeneous(b);
    CHECK((homogeneous(pose_compose(a, b)) - ab).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((homogeneous(pose_inverse(a)) - homogeneous(a).inverse()).cwiseAbs().maxCoeff() < 1e-9);

    const Pose left = pose_compose(pose_compose(a, b), c);
    const Pose right = pose_compose(a, pose_compose(b, c));
    CHECK((left.position - right.position).norm() < 1e-8);
    CHECK(geodesic_angle(left.orientation, right.orientation) < 1e-8);
    CHECK(std::abs(pose_compose(a, b).orientation.norm() - 1.0) < 1e-9);

    const Pose back = pose_inverse(pose_inverse(a));
    CHECK((back.position - a.position).norm() < 1e-9);
    CHECK(geodesic_angle(back.orientation, a.orientation) < 1e-9);
  }
}

TEST_CASE("geodesic_angle") {
  Rng rng = make_rng(5);
  for (int i = 0; i < 100; ++i) {
    const Quat q = random_quat(rng);
    const Quat neg(-q.w(), -q.x(), -q.y(), -q.z());
    CHECK(geodesic_angle(q, q) < 1e-7);
    CHECK(geodesic_angle(q, neg) < 1e-7);
    const Quat r = random_quat(rng);
    const double a = geodesic_angle(q, r);
    CHECK(a >= 0.0);
    CHECK(a <= kPi);
    CHECK(std::abs(geodesic_angle(q, Quat(-r.w(), -r.x(), -r.y(), -r.z())) - a) < 1e-12);
  }
  CHECK(std::abs(geodesic_angle(Quat::Identity(), yaw(kPi / 2.0)) - kPi / 2.0) < 1e-9);
}

TEST_CASE("rotation_error rotates the source onto the target") {
  Rng rng = make_rng(6);
  for (int i = 0; i < 200; ++i) {
    const Quat from = random_quat(rng);
    const Quat to = random_quat(rng);
    const Vec3 e = rotation_error(from, to);
    CHECK(e.norm() <= kPi + 1e-12);
    CHECK(std::abs(e.norm() - geodesic_angle(from, to)) < 1e-9);
    if (e.norm() > 1e-12) {
      const Quat applied = Quat(Eigen::AngleAxisd(e.norm(), e.normalized())) * from;
      CHECK(geodesic_angle(applied, to) < 1e-9);
    }
  }
}

TEST_CASE("rotate_toward never overshoots") {
  Rng rng = make_rng(7);
  for (int i = 0; i < 200; ++i) {
    const Quat from = random_quat(rng);
    const Quat to = random_quat(rng);
    const double step = uniform(rng, 0.0, 1.0);
    const Quat r = rotate_toward(from, to, step);
    const double total = geodesic_angle(from, to);
    CHECK(geodesic_angle(from, r) <= step + 1e-9);
    CHECK(geodesic_angle(r, to) == doctest::Approx(std::max(0.0, total - step)).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("axis-aligned boxes use open-interval semantics") {
  const Aabb a{Vec3(0, 0, 0), Vec3(1, 1, 1)};
  const Aabb touching{Vec3(1, 0, 0), Vec3(2, 1, 1)};
  const Aabb overlapping{Vec3(0.9, 0.2, 0.2), Vec3(2, 0.8, 0.8)};
  CHECK_FALSE(a.overlaps(touching));
  CHECK(a.overlaps(overlapping));
  CHECK(a.penetration(overlapping) == doctest::Approx(0.1));
  CHECK(a.contains(Vec3(0.5, 0.5, 0.5)));
  CHECK_FALSE(a.contains(Vec3(1.1, 0.5, 0.5)));
}

TEST_CASE("oriented box penetration") {
  const Vec3 extent(0.1, 0.1, 0.1);
  SUBCASE("axis-aligned boxes agree with the interval overlap") {
    const auto a = OrientedBox::attached(Pose::identity(), extent);
    const auto b = OrientedBox::attached(Pose::from_translation(Vec3(0.08, 0.0, 0.0)), extent);
    CHECK(box_penetration(a, b) == doctest::Approx(0.02));
    const auto touching = OrientedBox::attached(Pose::from_translation(Vec3(0.1, 0.0, 0.0)), extent);
    CHECK(box_penetration(a, touching) <= 1e-12);
  }
  SUBCASE("a rotated box is not inflated to its bounding box") {
    // A 45-degree cube on the diagonal at (0.1, 0.1): its bounding box reaches
    // into the unit cube's, but along its own face normal (1, 1, 0)/sqrt(2) the
    // gap is 0.2/sqrt(2) - 0.05 - 0.05 sqrt(2).
    const auto a = OrientedBox::attached(Pose::identity(), extent);
    const Pose rotated{Vec3(0.1, 0.1, 0.0), yaw(kPi / 4.0)};
    const auto b = OrientedBox::attached(rotated, extent);
    CHECK(oriented_box_bounds(Pose::identity(), extent).overlaps(oriented_box_bounds(rotated, extent)));
    CHECK(box_penetration(a, b) ==
          doctest::Approx(0.05 + 0.05 * std::sqrt(2.0) - 0.2 / std::sqrt(2.0)).epsilon(1e-9));
    // Corner-first contact: the rotated cube's corner reaches x = 0.12 - 0.0707.
    const Pose closer{Vec3(0.11, 0.0, 0.0), yaw(kPi / 4.0)};
    CHECK(box_penetration(a, OrientedBox::attached(closer, extent)) ==
          doctest::Approx(0.05 + 0.05 * std::sqrt(2.0) - 0.11).epsilon(1e-9));
  }
  SUBCASE("symmetric and invariant under a common rigid motion") {
    Rng rng = make_rng(8);
    for (int i = 0; i < 200; ++i) {
      const Pose pa = random_pose(rng, 0.05);
      const Pose pb = random_pose(rng, 0.05);
      const Pose g = random_pose(rng);
      const double d = box_penetration(OrientedBox::attached(pa, extent), OrientedBox::attached(pb, extent));
      CHECK(d == doctest::Approx(box_penetration(OrientedBox::attached(pb, extent), OrientedBox::attached(pa, extent))));
      const double moved = box_penetration(OrientedBox::attached(pose_compose(g, pa), extent),
                                           OrientedBox::attached(pose_compose(g, pb), extent));
      CHECK(moved == doctest::Approx(d).epsilon(1e-9).scale(1.0));
    }
  }
  SUBCASE("agrees with point sampling on separation") {
    // Any point of b strictly inside a proves overlap.
    Rng rng = make_rng(9);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
      const Pose pa = Pose::identity();
      const Pose pb = random_pose(rng, 0.07);
      const auto a = OrientedBox::attached(pa, extent);
      const auto b = OrientedBox::attached(pb, extent);
      bool inside = false;
      for (int k = 0; k < 400 && !inside; ++k) {
        const Vec3 local(uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05));
        inside = (pb.apply(local).cwiseAbs().array() < 0.05).all();
      }
      if (inside) {
        CHECK(box_penetration(a, b) > 0.0);
        ++checked;
      }
    }
    CHECK(checked > 20);
  }
}

TEST_CASE("segment_intersects") {
  const Aabb box{Vec3(-0.1, -0.1, -0.1), Vec3(0.1, 0.1, 0.1)};
  CHECK(segment_intersects(Vec3(-1, 0, 0), Vec3(1, 0, 0), box));
  CHECK_FALSE(segment_intersects(Vec3(-1, 0.5, 0), Vec3(1, 0.5, 0), box));
  CHECK_FALSE(segment_intersects(Vec3(-1, 0, 0), Vec3(-0.5, 0, 0), box));
  // Grazing a face is not an intersection.
  CHECK_FALSE(segment_intersects(Vec3(-1, 0.1, 0), Vec3(1, 0.1, 0), box));
}
