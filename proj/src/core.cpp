#include "robreg/core.hpp"

#include <cmath>
#include <limits>

namespace robreg {

void CorrespondenceSet::validate() const {
  if (source.empty()) throw std::invalid_argument("correspondence set is empty");
  if (target.size() != source.size() || noise_bounds.size() != source.size())
    throw std::invalid_argument("source, target and noise bounds differ in length");
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (!source[i].allFinite() || !target[i].allFinite())
      throw std::invalid_argument("non-finite coordinate at index " + std::to_string(i));
    if (!(noise_bounds[i] > 0.0) || !std::isfinite(noise_bounds[i]))
      throw std::invalid_argument("noise bound must be positive at index " + std::to_string(i));
  }
}

UnitQuaternion::UnitQuaternion(const Vec4& q) {
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("quaternion must be nonzero and finite");
  q_ = q / n;
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0)) return identity();
  const Vec3 v = axis / n * std::sin(0.5 * angle);
  return UnitQuaternion(Vec4(v.x(), v.y(), v.z(), std::cos(0.5 * angle)));
}

UnitQuaternion UnitQuaternion::from_matrix(const Mat3& R) {
  Eigen::Quaterniond e(R);
  return UnitQuaternion(Vec4(e.x(), e.y(), e.z(), e.w()));
}

Mat3 UnitQuaternion::matrix() const {
  Eigen::Quaterniond e(q_[3], q_[0], q_[1], q_[2]);
  return e.toRotationMatrix();
}

bool RigidTransform::valid(double tol) const {
  if (!(scale > 0.0) || !translation.allFinite()) return false;
  const Mat3 r = R();
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

void TlsConfig::validate() const {
  if (!(cbar_sq > 0.0)) throw std::invalid_argument("cbar_sq must be positive");
  if (!(noise_quantile_p > 0.0 && noise_quantile_p < 1.0))
    throw std::invalid_argument("noise_quantile_p must lie in (0,1)");
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(),
       v.z(), 0, -v.x(),
       -v.y(), v.x(), 0;
  return m;
}

Vec4 homogenize(const Vec3& v) { return Vec4(v.x(), v.y(), v.z(), 0.0); }

Mat4 quat_omega1(const Vec4& q) {
  Mat4 m;
  m << q[3], -q[2], q[1], q[0],
       q[2], q[3], -q[0], q[1],
       -q[1], q[0], q[3], q[2],
       -q[0], -q[1], -q[2], q[3];
  return m;
}

Mat4 quat_omega2(const Vec4& q) {
  Mat4 m;
  m << q[3], q[2], -q[1], q[0],
       -q[2], q[3], q[0], q[1],
       q[1], -q[0], q[3], q[2],
       -q[0], -q[1], -q[2], q[3];
  return m;
}

Vec4 quat_product(const Vec4& a, const Vec4& b) { return quat_omega1(a) * b; }

Vec3 rotate(const UnitQuaternion& q, const Vec3& v) {
  const Vec4 r = quat_product(quat_product(q.coeffs(), homogenize(v)), q.inverse().coeffs());
  return r.head<3>();
}

namespace {

double gamma_series(double a, double x) {
  double sum = 1.0 / a, term = sum, ap = a;
  for (int n = 0; n < 1000; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper tail Q(a,x) by modified Lentz continued fraction.
double gamma_cont_frac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-17) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_series(a, x);
  return 1.0 - gamma_cont_frac(a, x);
}

double chi2_quantile(double dof, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("probability must lie in (0,1)");
  double lo = 0.0, hi = std::max(1.0, dof);
  while (gamma_p(0.5 * dof, 0.5 * hi) < p) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (gamma_p(0.5 * dof, 0.5 * mid) < p) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double beta_from_sigma(double sigma, double p) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  return sigma * std::sqrt(chi2_quantile(3.0, p));
}

double geodesic_rotation_error(const Mat3& Ra, const Mat3& Rb) {
  // atan2 form is the arccos formula without its loss of precision near zero.
  const Mat3 m = Ra.transpose() * Rb;
  const double c = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);
  const Vec3 v(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  const double s = 0.5 * v.norm();
  return std::atan2(s, c);
}

}  // namespace robreg
