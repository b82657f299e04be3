#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

#include "robreg/pipeline.hpp"
#include "robreg/synthetic.hpp"

namespace robreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// k-th largest (1-based); the largest when fewer than k values exist.
double kth_largest(std::vector<double> v, std::size_t k) {
  if (v.empty()) return kInf;
  k = std::min(k, v.size());
  std::nth_element(v.begin(), v.begin() + (k - 1), v.end(), std::greater<>());
  return v[k - 1];
}

double sigma_min_of(const Vec3& u1, const Vec3& u2, const Vec3& u3) {
  Mat3 U;
  U << u1, u2, u3;
  const double l = Eigen::SelfAdjointEigenSolver<Mat3>(U.transpose() * U, Eigen::EigenvaluesOnly).eigenvalues()[0];
  return std::sqrt(std::max(0.0, l));
}

long long choose3(long long n) { return n < 3 ? 0 : n * (n - 1) * (n - 2) / 6; }

}  // namespace

ErrorBounds compute_bounds(const RegistrationResult& r, const CorrespondenceSet& c, const MeasurementGraph& g,
                           double cbar_sq, const BoundOptions& opts) {
  ErrorBounds eb;
  const double cbar = std::sqrt(cbar_sq);
  const double s_hat = r.transform.scale;
  const Mat3 sR_hat = s_hat * r.transform.R();
  const std::vector<int>& S = r.inlier_indices;
  const int n = g.n_vertices;

  // TIM lookup by vertex pair
  std::vector<int> tim_of;
  auto pair_index = [n](int i, int j) { return static_cast<std::size_t>(std::min(i, j)) * n + std::max(i, j); };
  const bool dense_lookup = static_cast<long long>(n) * n <= 50'000'000LL;
  if (dense_lookup) {
    tim_of.assign(static_cast<std::size_t>(n) * n, -1);
    for (std::size_t k = 0; k < g.tims.size(); ++k) tim_of[pair_index(g.tims[k].i, g.tims[k].j)] = static_cast<int>(k);
  }
  std::vector<char> degenerate(g.tims.size(), 0);
  for (int k : g.degenerate_tims) degenerate[k] = 1;
  auto find_tim = [&](int i, int j) -> int {
    if (dense_lookup) return tim_of[pair_index(i, j)];
    for (std::size_t k = 0; k < g.tims.size(); ++k)
      if ((g.tims[k].i == std::min(i, j)) && (g.tims[k].j == std::max(i, j))) return static_cast<int>(k);
    return -1;
  };
  auto alpha_of = [&](int k) { return g.tims[k].beta_bar / g.tims[k].a_bar.norm(); };

  // coarse bounds over the selected set
  double max_alpha = 0.0, max_beta = 0.0;
  for (int i : S) max_beta = std::max(max_beta, c.noise_bounds[i]);
  for (std::size_t a = 0; a < S.size(); ++a)
    for (std::size_t b = a + 1; b < S.size(); ++b) {
      const int k = find_tim(S[a], S[b]);
      if (k >= 0 && !degenerate[k]) max_alpha = std::max(max_alpha, alpha_of(k));
    }
  eb.eta_s = r.scale_was_known ? 0.0 : (1.0 + cbar) * max_alpha;
  eb.eta_t = (6.0 + 3.0 * cbar + 3.0 * std::sqrt(3.0) * cbar) * max_beta;

  const long long m = static_cast<long long>(S.size());
  if (m < 4) {
    eb.eta_R_frobenius = kInf;
    eb.rotation_diagnosis = "fewer than 4 selected inliers";
  } else {
    auto unit = [&](int i, int j) -> Vec3 {
      const Vec3 d = c.source[j] - c.source[i];
      const double nd = d.norm();
      return nd > 0.0 ? Vec3(d / nd) : Vec3::Zero();
    };
    double smin = kInf;
    const long long tuples = m * choose3(m - 1);
    if (tuples <= opts.full_tuple_limit) {
      for (long long i = 0; i < m; ++i)
        for (long long j = 0; j < m; ++j)
          for (long long h = j + 1; h < m; ++h)
            for (long long k = h + 1; k < m; ++k) {
              if (i == j || i == h || i == k) continue;
              smin = std::min(smin, sigma_min_of(unit(S[i], S[j]), unit(S[i], S[h]), unit(S[i], S[k])));
            }
    } else {
      eb.sigma_min_sampled = true;
      SplitMix64 rng(0x5eed);
      for (int t = 0; t < opts.sampled_tuples; ++t) {
        int q[4];
        for (int a = 0; a < 4; ++a) {
          bool fresh;
          do {
            q[a] = S[rng.below(static_cast<std::uint64_t>(m))];
            fresh = true;
            for (int b = 0; b < a; ++b) fresh = fresh && q[b] != q[a];
          } while (!fresh);
        }
        smin = std::min(smin, sigma_min_of(unit(q[0], q[1]), unit(q[0], q[2]), unit(q[0], q[3])));
      }
    }
    eb.sigma_min_U = smin;
    if (!(smin > 1e-12)) {
      eb.eta_R_frobenius = kInf;
      eb.rotation_diagnosis = "selected inliers are coplanar or collinear";
    } else {
      eb.eta_R_frobenius = std::sqrt(3.0) * (1.0 + cbar) * max_alpha / smin;
    }
  }

  // tighter bounds
  TighterBounds tb;
  if (r.scale_was_known) {
    tb.scale = 0.0;
  } else {
    std::vector<double> zeta;
    for (int k : r.scale_inlier_trims) {
      const Trim& t = g.trims[k];
      zeta.push_back(std::abs(t.s_meas - s_hat) + t.alpha);
    }
    tb.scale = kth_largest(zeta, 3);
  }
  const double s_lower = s_hat - tb.scale;

  // rotation: worst case over correspondence triplets whose three TIMs are rotation inliers
  std::vector<char> rot_in(g.tims.size(), 0);
  for (int k : r.rotation_inlier_tims) rot_in[k] = 1;
  auto zeta_R = [&](int k) {
    const Tim& t = g.tims[k];
    return (t.b_bar - sR_hat * t.a_bar).norm() / t.a_bar.norm() + alpha_of(k);
  };
  auto triplet_bound = [&](const std::vector<int>& tims) {
    Eigen::Matrix<double, 3, Eigen::Dynamic> A(3, tims.size());
    double z2 = 0.0;
    for (std::size_t q = 0; q < tims.size(); ++q) {
      A.col(q) = g.tims[tims[q]].a_bar.normalized();
      z2 += std::pow(zeta_R(tims[q]), 2);
    }
    const Vec3 sv = Eigen::JacobiSVD<MatX>(A).singularValues();  // descending
    const double den = 2.0 * s_hat * (sv[1] * sv[1] + sv[2] * sv[2]);
    return den > 0.0 ? z2 / den : kInf;
  };
  const std::vector<int>& V = r.clique_vertices;
  tb.subsets = choose3(static_cast<long long>(V.size()));
  double rot_scaled = 0.0;
  if (tb.subsets <= opts.subset_cap) {
    int used = 0;
    for (std::size_t a = 0; a < V.size(); ++a)
      for (std::size_t b = a + 1; b < V.size(); ++b)
        for (std::size_t d = b + 1; d < V.size(); ++d) {
          const int k1 = find_tim(V[a], V[b]), k2 = find_tim(V[a], V[d]), k3 = find_tim(V[b], V[d]);
          if (k1 < 0 || k2 < 0 || k3 < 0 || !rot_in[k1] || !rot_in[k2] || !rot_in[k3]) continue;
          if (degenerate[k1] || degenerate[k2] || degenerate[k3]) continue;
          rot_scaled = std::max(rot_scaled, triplet_bound({k1, k2, k3}));
          ++used;
        }
    if (used == 0) rot_scaled = kInf;
  } else {
    tb.worst_case = false;
    std::vector<int> all;
    for (int k : r.rotation_inlier_tims)
      if (!degenerate[k]) all.push_back(k);
    rot_scaled = all.size() >= 3 ? triplet_bound(all) : kInf;
  }
  tb.rotation_scaled = rot_scaled;
  if (s_lower > 0.0 && std::isfinite(rot_scaled)) {
    const double x = 1.0 - rot_scaled / s_lower;
    tb.rotation_angle = x >= -1.0 ? std::acos(std::min(1.0, x)) : M_PI;
  } else {
    tb.rotation_angle = M_PI;
  }

  // translation: per axis, third largest of D |a_i| + zeta_t
  const double D = std::sqrt(tb.scale * tb.scale + 2.0 * s_hat * rot_scaled);
  for (int l = 0; l < 3; ++l) {
    std::vector<double> v;
    for (int i : S) {
      const double phi = std::abs(c.target[i][l] - (sR_hat * c.source[i])[l] - r.transform.translation[l]);
      v.push_back(D * c.source[i].norm() + phi + c.noise_bounds[i]);
    }
    tb.translation[l] = kth_largest(v, 3);
  }
  eb.tighter_bounds = tb;
  return eb;
}

}  // namespace robreg
