#pragma once

#include <vector>

#include "robreg/core.hpp"

namespace robreg {

struct RotationProblem {
  std::vector<Vec3> a_bars;  // already multiplied by the scale estimate
  std::vector<Vec3> b_bars;
  std::vector<double> beta_bars;
  double cbar_sq = 1.0;

  std::size_t size() const { return a_bars.size(); }
  void validate() const;
};

struct HornResult {
  UnitQuaternion rotation;
  bool degenerate = false;  // top eigenvalue not simple: rotation about the common axis is free
};

// Minimizes sum w_k |b_k - R a_k|^2 over SO(3).
HornResult horn_weighted(const std::vector<Vec3>& a, const std::vector<Vec3>& b, const std::vector<double>& w);

struct GncOptions {
  double mu_factor = 1.4;
  double mu_stop = 1e6;
  // Floor for the starting mu. A larger floor gives far residuals zero weight
  // before the first solve.
  double mu_min = 1e-15;
  double binary_tol = 1e-6;
  int max_iterations = 1000;
  bool polish = true;
  int max_polish = 100;
};

struct RotationSolution {
  UnitQuaternion rotation;
  std::vector<int> theta;  // +1 inlier, -1 outlier
  double cost = 0.0;       // truncated least squares cost at `rotation`
  int gnc_iterations = 0;
  bool converged = false;
  bool degenerate = false;
  int polish_steps = 0;
  int surrogate_increases = 0;  // alternation steps where the surrogate went up (expected 0)
};

double squared_residual(const RotationProblem& p, const Mat3& R, std::size_t k);
double tls_rotation_cost(const RotationProblem& p, const Mat3& R);
std::vector<int> residual_theta(const RotationProblem& p, const Mat3& R);
// Cost of a fixed (R, theta) pair: inliers pay their residual, outliers pay cbar^2.
double binary_cost(const RotationProblem& p, const Mat3& R, const std::vector<int>& theta);

// Weighted Horn on the theta inliers with weights 1/beta^2.
HornResult horn_on_inliers(const RotationProblem& p, const std::vector<int>& theta);

// Threshold-and-Horn alternation from a starting rotation (the GNC polish step).
RotationSolution refine_tls(const RotationProblem& p, const UnitQuaternion& start, int max_steps = 100);

RotationSolution solve_gnc_tls(const RotationProblem& p, const GncOptions& opts = {});

}  // namespace robreg
