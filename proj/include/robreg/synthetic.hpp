#pragma once

#include <cstdint>
#include <vector>

#include "robreg/core.hpp"

namespace robreg {

// SplitMix64 (Steele, Lea, Flood 2014): state += 0x9e3779b97f4a7c15, then the
// output is mixed with two xor-shift-multiply rounds. Doubles take the top 53
// bits; normals use Box-Muller with both outputs consumed in order.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();                  // [0, 1)
  double uniform(double lo, double hi);
  double normal();                   // standard normal
  std::uint64_t below(std::uint64_t n);  // uniform integer in [0, n), n > 0
  Vec3 unit_vector();
  Vec3 in_ball(double radius);
  UnitQuaternion rotation();

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

enum class SourceKind { unit_cube, reference };

struct SyntheticSpec {
  int n_points = 100;
  double sigma = 0.01;
  double outlier_rate = 0.0;
  double scale_min = 1.0, scale_max = 5.0;
  double translation_norm_max = 1.0;
  double outlier_radius = 5.0;
  std::uint64_t seed = 0;
  bool known_scale = false;  // scale fixed to 1
  bool all_to_all = false;
  double overlap_fraction = 1.0;
  SourceKind source = SourceKind::unit_cube;
  // beta = beta_sigmas * sigma; with sigma = 0 the bound is noiseless_beta.
  double beta_sigmas = 5.54;
  double noiseless_beta = 0.01;

  void validate() const;
  double beta() const { return sigma > 0.0 ? beta_sigmas * sigma : noiseless_beta; }
};

struct SyntheticData {
  CorrespondenceSet correspondences;
  RigidTransform truth;
  std::vector<int> labels;  // 1 inlier, 0 outlier
};

SyntheticData generate(const SyntheticSpec& spec);

// Truncated isotropic Gaussian: resampled until the norm is at most bound.
Vec3 bounded_noise(SplitMix64& rng, double sigma, double bound);

// 40 points inside the unit cube, shaped roughly like a rabbit.
const std::vector<Point3>& reference_cloud();

}  // namespace robreg
