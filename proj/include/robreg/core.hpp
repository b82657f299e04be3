#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <vector>

namespace robreg {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

// Points are plain Eigen vectors; finiteness is checked where data enters.
using Point3 = Vec3;

struct CorrespondenceSet {
  std::vector<Point3> source;
  std::vector<Point3> target;
  std::vector<double> noise_bounds;

  std::size_t size() const { return source.size(); }
  // Throws std::invalid_argument on length mismatch, N == 0, beta <= 0 or non-finite data.
  void validate() const;
};

// Layout [q1 q2 q3 | q4]: vector part first, scalar last.
class UnitQuaternion {
 public:
  UnitQuaternion() : q_(0, 0, 0, 1) {}
  explicit UnitQuaternion(const Vec4& q);
  UnitQuaternion(double q1, double q2, double q3, double q4)
      : UnitQuaternion(Vec4(q1, q2, q3, q4)) {}

  static UnitQuaternion identity() { return {}; }
  static UnitQuaternion from_axis_angle(const Vec3& axis, double angle);
  static UnitQuaternion from_matrix(const Mat3& R);

  const Vec4& coeffs() const { return q_; }
  double operator[](int i) const { return q_[i]; }
  Vec3 vec() const { return q_.head<3>(); }
  double w() const { return q_[3]; }

  UnitQuaternion inverse() const { return UnitQuaternion(Vec4(-q_[0], -q_[1], -q_[2], q_[3])); }
  Mat3 matrix() const;

 private:
  Vec4 q_;
};

struct RigidTransform {
  double scale = 1.0;
  UnitQuaternion rotation;
  Vec3 translation = Vec3::Zero();

  Mat3 R() const { return rotation.matrix(); }
  Vec3 apply(const Vec3& a) const { return scale * (R() * a) + translation; }
  bool valid(double tol = 1e-10) const;
};

struct TlsConfig {
  double cbar_sq = 1.0;
  // Default matches a 5.54-sigma radius for isotropic 3-D Gaussian noise.
  double noise_quantile_p = 1.0 - 1e-6;

  void validate() const;
};

Mat3 skew(const Vec3& v);
Vec4 homogenize(const Vec3& v);

Mat4 quat_omega1(const Vec4& q);
Mat4 quat_omega2(const Vec4& q);
inline Mat4 quat_omega1(const UnitQuaternion& q) { return quat_omega1(q.coeffs()); }
inline Mat4 quat_omega2(const UnitQuaternion& q) { return quat_omega2(q.coeffs()); }

// a o b
Vec4 quat_product(const Vec4& a, const Vec4& b);

Vec3 rotate(const UnitQuaternion& q, const Vec3& v);

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
double chi2_quantile(double dof, double p);
double beta_from_sigma(double sigma, double p);

double geodesic_rotation_error(const Mat3& Ra, const Mat3& Rb);

}  // namespace robreg
