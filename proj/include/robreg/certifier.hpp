#pragma once

#include <string>
#include <vector>

#include "robreg/core.hpp"
#include "robreg/rotation.hpp"

namespace robreg {

// Quadratic form of the binary-cloned rotation problem over
// x = [q; theta_1 q; ...; theta_K q], stored densely with 4x4 blocks.
struct QcqpData {
  int K = 0;
  double cbar_sq = 1.0;
  MatX Q;
  // TIMs divided by their bound, kept for residual computations.
  std::vector<Vec3> a_n, b_n;

  int dim() const { return 4 * (K + 1); }
  auto block(int i, int j) const { return Q.block<4, 4>(4 * i, 4 * j); }
};

QcqpData build_Q(const RotationProblem& p);

struct CandidateSolution {
  UnitQuaternion q_hat;
  std::vector<int> thetas;
  double mu_hat = 0.0;  // x^T Q x at the candidate
};

VecX lift(const UnitQuaternion& q, const std::vector<int>& thetas);
CandidateSolution make_candidate(const QcqpData& d, const UnitQuaternion& q, const std::vector<int>& thetas);

// Everything expressed in the frame rotated by the candidate quaternion.
struct RotatedData {
  int K = 0;
  double cbar_sq = 1.0;
  double mu_hat = 0.0;
  std::vector<int> theta;  // theta[0] = +1 for the anchor block
  MatX Qbar;
  VecX xbar;
  std::vector<Vec3> xi;    // normalized residuals R^T (b - R a) / beta, index 1..K (xi[0] unused)
  std::vector<Vec3> a_n;   // normalized a, index 1..K
  std::vector<int> u;      // (K+1)^2 table: index of upper block (r,c) in row-major order, -1 elsewhere
  std::vector<std::pair<int, int>> Z;
  // Fixed parts of the diagonal blocks implied by the block rows 1..K of M xbar = 0
  // (entry 0 is minus the sum of the others).
  std::vector<Vec3> phi;
  std::vector<double> s_fixed;

  int dim() const { return 4 * (K + 1); }
  int L() const { return static_cast<int>(Z.size()); }
  int index(int r, int c) const { return u[static_cast<std::size_t>(r) * (K + 1) + c]; }
};

RotatedData rotate_problem(const QcqpData& d, const CandidateSolution& c);

// Norm of sum over inliers of [xi_k]_x a_k; zero at a stationary candidate.
double stationarity_violation(const RotatedData& rd);

MatX initial_dual_guess(const RotatedData& rd);

MatX project_psd(const MatX& M);
MatX project_affine(const MatX& M, const RotatedData& rd);

// The linear system solved for the off-diagonal vector parts and its closed-form inverse (dense, for checks).
MatX affine_system_matrix(const RotatedData& rd);
MatX affine_system_inverse(const RotatedData& rd);

double min_eigenvalue(const MatX& M);

enum class Verdict { certified, suboptimal, budget_exhausted };
std::string to_string(Verdict v);

struct CertifyOptions {
  int max_iterations = 200;
  double eta_target = 1e-3;
  double gamma = 1.0;
  double fixed_point_tol = 1e-10;
  double stationarity_tol = 1e-6;
  // Reject without iterating when the candidate is provably improvable
  // (theta disagrees with the residual test, or not stationary).
  bool early_reject = true;
};

struct Certificate {
  Verdict verdict = Verdict::budget_exhausted;
  double eta = 0.0;             // (K+1)|lambda_min| / mu_hat
  double eta_normalized = 0.0;  // (K+1)|lambda_min| / max(mu_hat, cbar^2); drives the verdict
  double gap_bound = 0.0;       // (K+1)|lambda_min|, absolute bound on mu_hat - mu_star
  double mu_hat = 0.0;
  int iterations_used = 0;
  std::vector<double> min_eigenvalue_trace;
  double stationarity_violation = 0.0;
  bool stationary = true;
  bool theta_consistent = true;
  std::string note;
};

Certificate certify(const QcqpData& d, const CandidateSolution& c, const CertifyOptions& opts = {});
Certificate certify(const RotationProblem& p, const RotationSolution& s, const CertifyOptions& opts = {});

}  // namespace robreg
