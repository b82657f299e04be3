#pragma once

#include <chrono>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "robreg/certifier.hpp"
#include "robreg/clique.hpp"
#include "robreg/core.hpp"
#include "robreg/invariants.hpp"
#include "robreg/rotation.hpp"
#include "robreg/scalar_tls.hpp"

namespace robreg {

class InsufficientInliers : public std::runtime_error {
 public:
  InsufficientInliers() : std::runtime_error("insufficient inliers") {}
};

struct RegisterOptions {
  std::optional<double> known_scale;
  TopologyKind topology = TopologyKind::complete;
  bool certify = false;
  // The certifier works on at most this many clique TIMs (evenly spread over the clique edges).
  int certify_max_tims = 100;
  CertifyOptions certify_options;
  GncOptions gnc;
  std::chrono::milliseconds clique_budget{10000};
  // Re-solve the scale on the TRIMs inside the selected clique before the rotation stage.
  bool refine_scale = true;
};

// Certifies start on p, or on an evenly spread subset of max_tims TIMs when p is
// larger; in that case the rotation is first refined on the subset.
Certificate certify_rotation(const RotationProblem& p, const UnitQuaternion& start, int max_tims,
                             const CertifyOptions& opts = {});

struct StageTimings {
  double scale_ms = 0, prune_ms = 0, clique_ms = 0, rotation_ms = 0, certify_ms = 0, translation_ms = 0, total_ms = 0;
};

struct StageStats {
  int n_tims = 0;
  int n_trims = 0;
  int degenerate_tims = 0;
  int scale_inliers = 0;
  int edges_kept = 0;
  int clique_size = 0;
  bool clique_certified_maximum = false;
  int rotation_tims = 0;
  int rotation_inliers = 0;
  int gnc_iterations = 0;
  bool rotation_degenerate = false;
  int certified_tims = 0;
  bool used_next_clique = false;
  int translation_inliers = 0;
};

struct RegistrationResult {
  RigidTransform transform;
  std::vector<int> inlier_indices;  // sorted, subset of clique_vertices
  std::optional<Certificate> certificate;
  StageTimings stage_timings;
  StageStats stage_stats;

  // Intermediate consensus sets, kept for the bound calculators.
  bool scale_was_known = false;
  std::vector<int> scale_inlier_trims;     // indices into MeasurementGraph::trims (final scale fit)
  std::vector<int> clique_vertices;
  std::vector<int> rotation_inlier_tims;   // indices into MeasurementGraph::tims
};

struct TranslationEstimate {
  Vec3 t = Vec3::Zero();
  std::vector<bool> axis_masks[3];
  std::vector<bool> inliers;  // all three axes agree
};

// Scalar TLS per axis on b_i - s R a_i with bound beta_i.
TranslationEstimate estimate_translation(const std::vector<Point3>& source, const std::vector<Point3>& target,
                                         double s_hat, const Mat3& R_hat, const std::vector<double>& betas,
                                         double cbar_sq);

RegistrationResult register_clouds(const CorrespondenceSet& c, const TlsConfig& cfg = {},
                                   const RegisterOptions& opts = {});
// Same, reusing a graph built with build_measurement_graph.
RegistrationResult register_clouds(const CorrespondenceSet& c, const MeasurementGraph& g, const TlsConfig& cfg,
                                   const RegisterOptions& opts);

struct TighterBounds {
  double scale = 0.0;
  // bound on s (1 - cos theta_R) and the implied angle (pi when uninformative)
  double rotation_scaled = 0.0;
  double rotation_angle = 0.0;
  Vec3 translation = Vec3::Zero();  // per axis
  bool worst_case = true;           // false when the 3-subset enumeration was capped
  long long subsets = 0;
};

struct ErrorBounds {
  double eta_s = 0.0;
  double eta_R_frobenius = 0.0;  // bound on ||s R - s_hat R_hat||_F
  double eta_t = 0.0;
  double sigma_min_U = 0.0;
  bool sigma_min_sampled = false;
  std::string rotation_diagnosis;  // set when the rotation bound is infinite
  std::optional<TighterBounds> tighter_bounds;
};

struct BoundOptions {
  int full_tuple_limit = 500;
  int sampled_tuples = 20000;
  long long subset_cap = 10000;
};

ErrorBounds compute_bounds(const RegistrationResult& r, const CorrespondenceSet& c, const MeasurementGraph& g,
                           double cbar_sq = 1.0, const BoundOptions& opts = {});

}  // namespace robreg
