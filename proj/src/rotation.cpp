#include "robreg/rotation.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace robreg {

void RotationProblem::validate() const {
  if (a_bars.size() < 2) throw std::invalid_argument("rotation problem needs at least two measurements");
  if (b_bars.size() != a_bars.size() || beta_bars.size() != a_bars.size())
    throw std::invalid_argument("rotation problem arrays differ in length");
  if (!(cbar_sq > 0.0)) throw std::invalid_argument("cbar_sq must be positive");
  for (std::size_t k = 0; k < a_bars.size(); ++k) {
    if (!(beta_bars[k] > 0.0)) throw std::invalid_argument("beta_bar must be positive");
    if (!a_bars[k].allFinite() || !b_bars[k].allFinite()) throw std::invalid_argument("non-finite TIM");
  }
}

HornResult horn_weighted(const std::vector<Vec3>& a, const std::vector<Vec3>& b, const std::vector<double>& w) {
  if (a.size() != b.size() || a.size() != w.size()) throw std::invalid_argument("horn_weighted: size mismatch");
  // b^T R a = q^T Omega1(b)^T Omega2(a) q
  Mat4 M = Mat4::Zero();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (w[k] <= 0.0) continue;
    M.noalias() += w[k] * (quat_omega1(homogenize(b[k])).transpose() * quat_omega2(homogenize(a[k])));
  }
  const Mat4 S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Mat4> es(S);
  const auto& ev = es.eigenvalues();
  HornResult r;
  r.rotation = UnitQuaternion(Vec4(es.eigenvectors().col(3)));
  const double scale = std::max(std::abs(ev[0]), std::abs(ev[3]));
  r.degenerate = !(scale > 0.0) || ev[3] - ev[2] <= 1e-10 * scale;
  return r;
}

double squared_residual(const RotationProblem& p, const Mat3& R, std::size_t k) {
  return (p.b_bars[k] - R * p.a_bars[k]).squaredNorm() / (p.beta_bars[k] * p.beta_bars[k]);
}

double tls_rotation_cost(const RotationProblem& p, const Mat3& R) {
  double f = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) f += std::min(squared_residual(p, R, k), p.cbar_sq);
  return f;
}

std::vector<int> residual_theta(const RotationProblem& p, const Mat3& R) {
  std::vector<int> th(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) th[k] = squared_residual(p, R, k) <= p.cbar_sq ? 1 : -1;
  return th;
}

double binary_cost(const RotationProblem& p, const Mat3& R, const std::vector<int>& theta) {
  double f = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) f += theta[k] > 0 ? squared_residual(p, R, k) : p.cbar_sq;
  return f;
}

HornResult horn_on_inliers(const RotationProblem& p, const std::vector<int>& theta) {
  std::vector<double> w(p.size());
  for (std::size_t k = 0; k < p.size(); ++k)
    w[k] = theta[k] > 0 ? 1.0 / (p.beta_bars[k] * p.beta_bars[k]) : 0.0;
  return horn_weighted(p.a_bars, p.b_bars, w);
}

namespace {

double surrogate(const std::vector<double>& r2, const std::vector<double>& w, double mu, double c2) {
  double f = 0.0;
  for (std::size_t k = 0; k < r2.size(); ++k) f += w[k] * r2[k] + mu * (1.0 - w[k]) * c2 / (mu + w[k]);
  return f;
}

}  // namespace

RotationSolution refine_tls(const RotationProblem& p, const UnitQuaternion& start, int max_steps) {
  // Alternate residual thresholding and Horn on the inlier set until the set
  // stops changing; the TLS cost cannot increase along the way.
  RotationSolution sol;
  sol.rotation = start;
  Mat3 R = start.matrix();
  double cost = tls_rotation_cost(p, R);
  std::vector<int> theta = residual_theta(p, R);
  for (int s = 0; s < max_steps; ++s) {
    int n_in = 0;
    for (int t : theta) n_in += t > 0;
    if (n_in < 2) break;
    const HornResult h = horn_on_inliers(p, theta);
    const Mat3 Rn = h.rotation.matrix();
    const double cn = tls_rotation_cost(p, Rn);
    if (cn > cost + 1e-12 * (1.0 + cost)) break;
    R = Rn;
    sol.rotation = h.rotation;
    sol.degenerate = h.degenerate;
    cost = cn;
    ++sol.polish_steps;
    const std::vector<int> next = residual_theta(p, R);
    if (next == theta) break;
    theta = next;
  }
  sol.theta = residual_theta(p, R);
  sol.cost = tls_rotation_cost(p, R);
  sol.converged = true;
  return sol;
}

RotationSolution solve_gnc_tls(const RotationProblem& p, const GncOptions& opts) {
  p.validate();
  const std::size_t K = p.size();
  const double c2 = p.cbar_sq;
  RotationSolution sol;

  Mat3 R = Mat3::Identity();
  std::vector<double> r2(K), w(K, 1.0), hw(K);
  auto update_residuals = [&] {
    for (std::size_t k = 0; k < K; ++k) r2[k] = squared_residual(p, R, k);
  };
  update_residuals();
  double r2max = 0.0;
  for (double v : r2) r2max = std::max(r2max, v);
  double mu = 2.0 * r2max - c2 > 0.0 ? c2 / (2.0 * r2max - c2) : opts.mu_stop;
  mu = std::max(mu, opts.mu_min);

  for (int it = 0; it < opts.max_iterations; ++it) {
    const double lo = mu / (mu + 1.0) * c2, hi = (mu + 1.0) / mu * c2;
    for (std::size_t k = 0; k < K; ++k) {
      if (r2[k] <= lo) w[k] = 1.0;
      else if (r2[k] >= hi) w[k] = 0.0;
      else w[k] = std::sqrt(c2 * mu * (mu + 1.0) / r2[k]) - mu;
    }
    const double before = surrogate(r2, w, mu, c2);
    for (std::size_t k = 0; k < K; ++k) hw[k] = w[k] / (p.beta_bars[k] * p.beta_bars[k]);
    const HornResult h = horn_weighted(p.a_bars, p.b_bars, hw);
    R = h.rotation.matrix();
    sol.rotation = h.rotation;
    sol.degenerate = h.degenerate;
    update_residuals();
    const double after = surrogate(r2, w, mu, c2);
    if (after > before + 1e-9 * (1.0 + std::abs(before))) ++sol.surrogate_increases;
    sol.gnc_iterations = it + 1;

    // All-near-zero weights early on are not a converged inlier set.
    bool binary = true;
    int ones = 0;
    for (double v : w) {
      binary = binary && (v <= opts.binary_tol || v >= 1.0 - opts.binary_tol);
      ones += v >= 1.0 - opts.binary_tol;
    }
    if ((binary && ones >= 2) || mu >= opts.mu_stop) {
      sol.converged = true;
      break;
    }
    mu *= opts.mu_factor;
  }

  std::vector<int> theta(K);
  for (std::size_t k = 0; k < K; ++k) theta[k] = w[k] >= 0.5 ? 1 : -1;

  if (opts.polish) {
    const RotationSolution r = refine_tls(p, sol.rotation, opts.max_polish);
    sol.rotation = r.rotation;
    sol.polish_steps = r.polish_steps;
    if (r.polish_steps > 0) sol.degenerate = r.degenerate;
    R = sol.rotation.matrix();
    theta = residual_theta(p, R);
  }

  sol.theta = theta;
  sol.cost = tls_rotation_cost(p, R);
  return sol;
}

}  // namespace robreg
