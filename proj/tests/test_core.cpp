#include <cmath>
#include <random>

#include "doctest.h"
#include "robreg/core.hpp"

using namespace robreg;

namespace {

UnitQuaternion random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return UnitQuaternion(Vec4(n(rng), n(rng), n(rng), n(rng)));
}

// Textbook Hamilton quaternion to matrix, written out independently.
Mat3 quat_to_matrix_oracle(const Vec4& q) {
  const double x = q[0], y = q[1], z = q[2], w = q[3];
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),
       2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
       2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y);
  return r;
}

}  // namespace

TEST_CASE("omega matrices at identity") {
  CHECK(quat_omega1(UnitQuaternion::identity()).isApprox(Mat4::Identity()));
  CHECK(quat_omega2(UnitQuaternion::identity()).isApprox(Mat4::Identity()));
}

TEST_CASE("omega matrices are orthogonal and commute") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const UnitQuaternion q = random_quat(rng), p = random_quat(rng);
    const Mat4 o1 = quat_omega1(q), o2 = quat_omega2(q);
    CHECK((o1.transpose() * o1 - Mat4::Identity()).norm() < 1e-12);
    CHECK((o2.transpose() * o2 - Mat4::Identity()).norm() < 1e-12);
    CHECK((o1.transpose() * q.coeffs() - Vec4(0, 0, 0, 1)).norm() < 1e-12);
    CHECK((o2.transpose() * q.coeffs() - Vec4(0, 0, 0, 1)).norm() < 1e-12);
    CHECK((quat_omega1(q.coeffs()) * quat_omega2(p.coeffs()) - quat_omega2(p.coeffs()) * quat_omega1(q.coeffs())).norm() < 1e-12);
    CHECK((quat_omega1(q.inverse()) - o1.transpose()).norm() < 1e-12);
    Mat4 blk = Mat4::Zero();
    blk.topLeftCorner<3, 3>() = q.matrix();
    blk(3, 3) = 1.0;
    CHECK((o1 * o2.transpose() - blk).norm() < 1e-12);
    // q o p = Omega1(q) p = Omega2(p) q
    CHECK((quat_omega1(q) * p.coeffs() - quat_omega2(p) * q.coeffs()).norm() < 1e-12);
  }
}

TEST_CASE("rotate") {
  CHECK((rotate(UnitQuaternion::identity(), Vec3(1, 2, 3)) - Vec3(1, 2, 3)).norm() < 1e-15);
  const UnitQuaternion qz = UnitQuaternion::from_axis_angle(Vec3::UnitZ(), M_PI / 2);
  CHECK((rotate(qz, Vec3(1, 0, 0)) - Vec3(0, 1, 0)).norm() < 1e-12);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (int t = 0; t < 1000; ++t) {
    const UnitQuaternion q = random_quat(rng);
    const Vec3 v(n(rng), n(rng), n(rng));
    const Vec3 r = rotate(q, v);
    CHECK((r - quat_to_matrix_oracle(q.coeffs()) * v).norm() < 1e-12 * (1 + v.norm()));
    CHECK(std::abs(r.norm() - v.norm()) < 1e-12 * (1 + v.norm()));
  }
}

TEST_CASE("quaternion matrix round trip") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const UnitQuaternion q = random_quat(rng);
    const UnitQuaternion r = UnitQuaternion::from_matrix(q.matrix());
    const double d = std::min((r.coeffs() - q.coeffs()).norm(), (r.coeffs() + q.coeffs()).norm());
    CHECK(d < 1e-10);
    RigidTransform T{2.0, q, Vec3(1, 2, 3)};
    CHECK(T.valid());
  }
}

TEST_CASE("beta_from_sigma") {
  CHECK(std::abs(beta_from_sigma(1.0, 0.97) - 3.0) < 0.01);
  CHECK(std::abs(beta_from_sigma(0.01, 1.0 - 1e-6) - 0.0554) < 0.0005);
  CHECK(std::abs(beta_from_sigma(0.02, 0.9) - 2 * beta_from_sigma(0.01, 0.9)) < 1e-12);
  CHECK(beta_from_sigma(1.0, 0.5) < beta_from_sigma(1.0, 0.6));
  CHECK_THROWS(beta_from_sigma(1.0, 1.0));
  CHECK_THROWS(beta_from_sigma(1.0, 0.0));
  // chi-square with 2 dof has the closed form -2 log(1-p)
  CHECK(std::abs(chi2_quantile(2.0, 0.8) + 2.0 * std::log(0.2)) < 1e-10);
}

TEST_CASE("geodesic rotation error") {
  CHECK(geodesic_rotation_error(Mat3::Identity(), Mat3::Identity()) == doctest::Approx(0.0));
  const Mat3 rx = UnitQuaternion::from_axis_angle(Vec3::UnitX(), M_PI).matrix();
  CHECK(geodesic_rotation_error(Mat3::Identity(), rx) == doctest::Approx(M_PI).epsilon(1e-12));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  for (int t = 0; t < 100; ++t) {
    const Mat3 R = random_quat(rng).matrix();
    const Vec3 axis(n(rng), n(rng), n(rng));
    const Mat3 d = UnitQuaternion::from_axis_angle(axis, 0.3).matrix();
    CHECK(std::abs(geodesic_rotation_error(R, R * d) - 0.3) < 1e-9);
    CHECK(std::abs(geodesic_rotation_error(R, d * R) - 0.3) < 1e-9);
  }
}
