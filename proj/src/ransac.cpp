#include "robreg/ransac.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>

#include "robreg/synthetic.hpp"

namespace robreg {

namespace {

bool fit(const CorrespondenceSet& c, const std::vector<int>& idx, bool scale, RigidTransform& out) {
  Eigen::Matrix3Xd A(3, idx.size()), B(3, idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    A.col(k) = c.source[idx[k]];
    B.col(k) = c.target[idx[k]];
  }
  const Eigen::Matrix4d T = Eigen::umeyama(A, B, scale);
  if (!T.allFinite()) return false;
  const Mat3 sR = T.topLeftCorner<3, 3>();
  const double s = std::cbrt(sR.determinant());
  if (!(s > 0.0)) return false;
  out.scale = s;
  out.rotation = UnitQuaternion::from_matrix(sR / s);
  out.translation = T.topRightCorner<3, 1>();
  return true;
}

std::vector<int> consensus(const CorrespondenceSet& c, const RigidTransform& T, double thr) {
  const Mat3 sR = T.scale * T.R();
  std::vector<int> in;
  for (std::size_t i = 0; i < c.size(); ++i)
    if ((c.target[i] - sR * c.source[i] - T.translation).norm() <= thr) in.push_back(static_cast<int>(i));
  return in;
}

}  // namespace

RansacResult ransac_baseline(const CorrespondenceSet& c, const RansacOptions& opts) {
  c.validate();
  const int n = static_cast<int>(c.size());
  if (n < 3) throw std::invalid_argument("RANSAC needs at least 3 correspondences");
  SplitMix64 rng(opts.seed);
  RansacResult best;
  int needed = opts.max_iters;
  for (int it = 0; it < std::min(needed, opts.max_iters); ++it) {
    best.iterations = it + 1;
    std::vector<int> sample;
    while (sample.size() < 3) {
      const int k = static_cast<int>(rng.below(n));
      bool dup = false;
      for (int s : sample) dup = dup || s == k;
      if (!dup) sample.push_back(k);
    }
    RigidTransform T;
    if (!fit(c, sample, opts.estimate_scale, T)) continue;
    std::vector<int> in = consensus(c, T, opts.inlier_threshold);
    if (in.size() > best.inliers.size()) {
      best.inliers = std::move(in);
      best.transform = T;
      // adaptive stop from the current inlier ratio
      const double w = static_cast<double>(best.inliers.size()) / n;
      const double p_fail = 1.0 - w * w * w;
      if (p_fail <= 0.0) {
        needed = it + 1;
      } else {
        const double k = std::log(1.0 - opts.confidence) / std::log(p_fail);
        if (std::isfinite(k)) needed = static_cast<int>(std::min<double>(opts.max_iters, std::ceil(k)));
      }
    }
  }
  if (best.inliers.size() >= 3) {
    RigidTransform T;
    if (fit(c, best.inliers, opts.estimate_scale, T)) {
      std::vector<int> in = consensus(c, T, opts.inlier_threshold);
      if (in.size() >= best.inliers.size()) {
        best.transform = T;
        best.inliers = std::move(in);
      }
    }
  }
  return best;
}

}  // namespace robreg
