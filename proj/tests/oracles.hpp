#pragma once

#include <vector>

#include "robreg/core.hpp"
#include "robreg/scalar_tls.hpp"

namespace oracle {

struct ScalarOracle {
  double min_cost;
  double argmin;
  int max_consensus;
};

// Enumerates all 2^K subsets: weighted center of each, exact objective there.
ScalarOracle scalar_tls_bruteforce(const robreg::ScalarTlsProblem& p);

}  // namespace oracle

#include "robreg/clique.hpp"

namespace oracle {

// Lexicographically smallest maximum clique by subset enumeration (n <= 20).
std::vector<int> clique_bruteforce(const robreg::PrunedGraph& g);
// Same, restricted to cliques that are not subsets of `previous`.
std::vector<int> next_clique_bruteforce(const robreg::PrunedGraph& g, const std::vector<int>& previous);

}  // namespace oracle

#include "robreg/rotation.hpp"

namespace oracle {

// Weighted orthogonal Procrustes via SVD of the cross-covariance (Kabsch).
robreg::Mat3 kabsch(const std::vector<robreg::Vec3>& a, const std::vector<robreg::Vec3>& b,
                    const std::vector<double>& w);

struct RotationOracle {
  double min_cost;
  std::vector<int> theta;
  robreg::Mat3 R;
};

// Minimum TLS rotation cost over all 2^K inlier assignments (K <= 16).
RotationOracle rotation_tls_bruteforce(const robreg::RotationProblem& p);

// Coarse axis-angle grid over the rotation ball followed by Nelder-Mead on the
// rotation vector, minimizing sum w |b - R a|^2.
robreg::Mat3 so3_grid_search(const std::vector<robreg::Vec3>& a, const std::vector<robreg::Vec3>& b,
                             const std::vector<double>& w, double grid_step_rad);

double weighted_rotation_cost(const std::vector<robreg::Vec3>& a, const std::vector<robreg::Vec3>& b,
                              const std::vector<double>& w, const robreg::Mat3& R);

robreg::Mat3 rotation_from_vector(const robreg::Vec3& v);

}  // namespace oracle

#include "robreg/certifier.hpp"

namespace oracle {

// Frobenius projection onto the affine set {M symmetric, M xbar = 0, M - Qbar + mu J in H}
// by writing every constraint explicitly over vec(M) and applying a pseudoinverse.
robreg::MatX affine_projection_dense(const robreg::MatX& M, const robreg::RotatedData& rd);

// Direct evaluation of the mixed-integer rotation objective at (q, theta).
double binary_rotation_objective(const robreg::RotationProblem& p, const robreg::UnitQuaternion& q,
                                 const std::vector<int>& theta);

}  // namespace oracle
