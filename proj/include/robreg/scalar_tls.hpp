#pragma once

#include <vector>

namespace robreg {

struct ScalarTlsProblem {
  std::vector<double> measurements;
  std::vector<double> alphas;
  double cbar_sq = 1.0;

  std::size_t size() const { return measurements.size(); }
  void validate() const;
};

struct ScalarTlsSolution {
  double estimate = 0.0;
  double cost = 0.0;
  std::vector<bool> inlier_mask;
  int consensus_sets_enumerated = 0;
};

// Truncated quadratic objective summed over all measurements.
double tls_objective(const ScalarTlsProblem& p, double s);
std::vector<bool> consensus_mask(const ScalarTlsProblem& p, double s);

ScalarTlsSolution solve_tls(const ScalarTlsProblem& p);

// Largest consensus set. The estimate is the midpoint of the interval where that
// set is active; wls_center holds the weighted least-squares center of the set.
struct ConsensusMaxSolution : ScalarTlsSolution {
  double wls_center = 0.0;
  double interval_lo = 0.0, interval_hi = 0.0;
};
ConsensusMaxSolution solve_consensus_max(const ScalarTlsProblem& p);

struct McEquivDiagnostics {
  bool holds = false;
  int n_in_max = 0;
  int second_largest = 0;
  double r_in = 0.0;  // smallest normalized residual sum over the max set's interval
};
McEquivDiagnostics check_mc_equiv_condition(const ScalarTlsProblem& p);

}  // namespace robreg
