#pragma once

#include <cstdint>
#include <vector>

#include "robreg/core.hpp"

namespace robreg {

struct RansacOptions {
  int max_iters = 1000;
  double inlier_threshold = 0.1;  // on ||b - (s R a + t)||
  double confidence = 0.999;
  bool estimate_scale = false;
  std::uint64_t seed = 0;
};

struct RansacResult {
  RigidTransform transform;
  std::vector<int> inliers;
  int iterations = 0;
};

// 3-point hypotheses (closed-form similarity fit), consensus scoring and a final
// refit on the best inlier set.
RansacResult ransac_baseline(const CorrespondenceSet& c, const RansacOptions& opts = {});

}  // namespace robreg
