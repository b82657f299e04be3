#include "robreg/certifier.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

extern "C" {
void dstemr_(const char* jobz, const char* range, const int* n, double* d, double* e, const double* vl,
             const double* vu, const int* il, const int* iu, int* m, double* w, double* z, const int* ldz,
             const int* nzc, int* isuppz, int* tryrac, double* work, const int* lwork, int* iwork,
             const int* liwork, int* info, std::size_t, std::size_t);
}

namespace robreg {

namespace {

// Symmetric eigen-solver split in two: Eigen reduces to tridiagonal form and
// back-transforms, LAPACK dstemr handles the tridiagonal problem. Full LAPACK
// drivers are avoided because some OpenBLAS builds return wrong eigenvectors
// from the back-transformation step.
class TridiagonalEig {
 public:
  explicit TridiagonalEig(const MatX& M) : tri_(M), n_(static_cast<int>(M.rows())) {}

  // Eigenvalues il..iu (1-based, ascending) and optionally their vectors.
  void pairs(int il, int iu, bool vectors, VecX& values, MatX& vecs) const {
    VecX d = tri_.diagonal();
    VecX e = VecX::Zero(n_);
    if (n_ > 1) e.head(n_ - 1) = tri_.subDiagonal();
    const char jobz = vectors ? 'V' : 'N', range = 'I';
    const double vl = 0.0, vu = 0.0;
    const int cnt = iu - il + 1;
    const int ldz = vectors ? n_ : 1;
    int nzc = vectors ? cnt : 0;
    int m = 0, info = 0, tryrac = 1, lwork = -1, liwork = -1, iwq = 0;
    double wq = 0.0;
    VecX w(n_);
    MatX z(ldz, vectors ? cnt : 1);
    std::vector<int> isuppz(2 * std::max(1, cnt));
    dstemr_(&jobz, &range, &n_, d.data(), e.data(), &vl, &vu, &il, &iu, &m, w.data(), z.data(), &ldz, &nzc,
            isuppz.data(), &tryrac, &wq, &lwork, &iwq, &liwork, &info, 1, 1);
    lwork = static_cast<int>(wq);
    liwork = iwq;
    std::vector<double> work(std::max(1, lwork));
    std::vector<int> iwork(std::max(1, liwork));
    dstemr_(&jobz, &range, &n_, d.data(), e.data(), &vl, &vu, &il, &iu, &m, w.data(), z.data(), &ldz, &nzc,
            isuppz.data(), &tryrac, work.data(), &lwork, iwork.data(), &liwork, &info, 1, 1);
    if (info != 0 || m != cnt) {
      // dstemr can fail on badly graded spectra; QL on the same tridiagonal matrix does not.
      Eigen::SelfAdjointEigenSolver<MatX> ql;
      ql.computeFromTridiagonal(tri_.diagonal(), tri_.subDiagonal(),
                                vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
      values = ql.eigenvalues().segment(il - 1, cnt);
      if (vectors) vecs = tri_.matrixQ() * ql.eigenvectors().middleCols(il - 1, cnt);
      return;
    }
    values = w.head(m);
    if (vectors) vecs = tri_.matrixQ() * z.leftCols(m);
  }

  VecX values() const {
    VecX v;
    MatX unused;
    pairs(1, n_, false, v, unused);
    return v;
  }

  int size() const { return n_; }

 private:
  Eigen::Tridiagonalization<MatX> tri_;
  int n_;
};

}  // namespace

QcqpData build_Q(const RotationProblem& p) {
  p.validate();
  QcqpData d;
  d.K = static_cast<int>(p.size());
  d.cbar_sq = p.cbar_sq;
  d.Q = MatX::Zero(d.dim(), d.dim());
  const Mat4 I = Mat4::Identity();
  for (int k = 1; k <= d.K; ++k) {
    const Vec3 a = p.a_bars[k - 1] / p.beta_bars[k - 1];
    const Vec3 b = p.b_bars[k - 1] / p.beta_bars[k - 1];
    d.a_n.push_back(a);
    d.b_n.push_back(b);
    const Mat4 A = 0.5 * ((b.squaredNorm() + a.squaredNorm()) * I +
                          2.0 * quat_omega1(homogenize(b)) * quat_omega2(homogenize(a)));
    d.Q.block<4, 4>(4 * k, 4 * k) = A + 0.5 * p.cbar_sq * I;
    const Mat4 off = 0.5 * A - 0.25 * p.cbar_sq * I;
    d.Q.block<4, 4>(0, 4 * k) = off;
    d.Q.block<4, 4>(4 * k, 0) = off.transpose();
  }
  return d;
}

VecX lift(const UnitQuaternion& q, const std::vector<int>& thetas) {
  VecX x(4 * (thetas.size() + 1));
  x.head<4>() = q.coeffs();
  for (std::size_t k = 0; k < thetas.size(); ++k) x.segment<4>(4 * (k + 1)) = thetas[k] * q.coeffs();
  return x;
}

CandidateSolution make_candidate(const QcqpData& d, const UnitQuaternion& q, const std::vector<int>& thetas) {
  if (static_cast<int>(thetas.size()) != d.K) throw std::invalid_argument("candidate length differs from K");
  for (int t : thetas)
    if (t != 1 && t != -1) throw std::invalid_argument("theta entries must be +1 or -1");
  CandidateSolution c{q, thetas, 0.0};
  const VecX x = lift(q, thetas);
  c.mu_hat = x.dot(d.Q * x);
  return c;
}

RotatedData rotate_problem(const QcqpData& d, const CandidateSolution& c) {
  if (static_cast<int>(c.thetas.size()) != d.K) throw std::invalid_argument("candidate length differs from K");
  if (!c.q_hat.coeffs().allFinite() || !std::isfinite(c.mu_hat)) throw std::invalid_argument("non-finite candidate");
  RotatedData rd;
  rd.K = d.K;
  rd.cbar_sq = d.cbar_sq;
  rd.mu_hat = c.mu_hat;
  rd.theta.assign(d.K + 1, 1);
  for (int k = 1; k <= d.K; ++k) rd.theta[k] = c.thetas[k - 1];

  const Mat4 W = quat_omega1(c.q_hat);
  const int n = d.dim();
  rd.Qbar = MatX::Zero(n, n);
  for (int k = 1; k <= d.K; ++k) {
    rd.Qbar.block<4, 4>(4 * k, 4 * k) = W.transpose() * d.Q.block<4, 4>(4 * k, 4 * k) * W;
    rd.Qbar.block<4, 4>(0, 4 * k) = W.transpose() * d.Q.block<4, 4>(0, 4 * k) * W;
    rd.Qbar.block<4, 4>(4 * k, 0) = rd.Qbar.block<4, 4>(0, 4 * k).transpose();
  }
  rd.xbar = VecX::Zero(n);
  for (int k = 0; k <= d.K; ++k) rd.xbar[4 * k + 3] = rd.theta[k];

  const Mat3 R = c.q_hat.matrix();
  rd.xi.assign(d.K + 1, Vec3::Zero());
  rd.a_n.assign(d.K + 1, Vec3::Zero());
  for (int k = 1; k <= d.K; ++k) {
    rd.a_n[k] = d.a_n[k - 1];
    rd.xi[k] = R.transpose() * (d.b_n[k - 1] - R * d.a_n[k - 1]);
  }

  const int K1 = d.K + 1;
  rd.u.assign(static_cast<std::size_t>(K1) * K1, -1);
  for (int r = 0; r < K1; ++r)
    for (int c2 = r + 1; c2 < K1; ++c2) {
      rd.u[static_cast<std::size_t>(r) * K1 + c2] = static_cast<int>(rd.Z.size());
      rd.Z.emplace_back(r, c2);
    }

  rd.phi.assign(K1, Vec3::Zero());
  rd.s_fixed.assign(K1, 0.0);
  for (int k = 1; k <= d.K; ++k) {
    rd.phi[k] = -rd.theta[k] * rd.Qbar.block<3, 1>(4 * k, 3) - rd.Qbar.block<3, 1>(4 * k, 4 * k + 3);
    rd.s_fixed[k] = -rd.theta[k] * rd.Qbar(4 * k + 3, 3) - rd.Qbar(4 * k + 3, 4 * k + 3);
    rd.phi[0] -= rd.phi[k];
    rd.s_fixed[0] -= rd.s_fixed[k];
  }
  return rd;
}

double stationarity_violation(const RotatedData& rd) {
  Vec3 s = Vec3::Zero();
  for (int k = 1; k <= rd.K; ++k)
    if (rd.theta[k] > 0) s += rd.xi[k].cross(rd.a_n[k]);
  return s.norm();
}

MatX initial_dual_guess(const RotatedData& rd) {
  const int n = rd.dim();
  MatX M = rd.Qbar;
  M.block<4, 4>(0, 0) -= rd.mu_hat * Mat4::Identity();
  Mat3 m0 = Mat3::Zero();
  for (int k = 0; k <= rd.K; ++k) {
    Mat3 mk = Mat3::Zero();
    if (k > 0) {
      mk = -rd.Qbar.block<3, 3>(0, 4 * k) -
           (0.25 * rd.theta[k] + 0.25) * rd.xi[k].squaredNorm() * Mat3::Identity() -
           0.5 * rd.cbar_sq * Mat3::Identity();
      m0 -= mk;
      M.block<3, 3>(4 * k, 4 * k) += mk;
    }
    M.block<3, 1>(4 * k, 4 * k + 3) += rd.phi[k];
    M.block<1, 3>(4 * k + 3, 4 * k) += rd.phi[k].transpose();
    M(4 * k + 3, 4 * k + 3) += rd.s_fixed[k];
  }
  M.block<3, 3>(0, 0) += m0;
  (void)n;
  return M;
}

MatX project_psd(const MatX& M) {
  const MatX Ms = 0.5 * (M + M.transpose());
  const TridiagonalEig eig(Ms);
  const VecX all = eig.values();
  const int n = eig.size();
  const int n_neg = static_cast<int>((all.array() < 0.0).count());
  if (n_neg == 0) return Ms;
  if (n_neg == n) return MatX::Zero(n, n);
  VecX lam;
  MatX V;
  MatX S;
  // Work with the smaller side of the spectrum.
  if (n_neg <= n - n_neg) {
    eig.pairs(1, n_neg, true, lam, V);
    S = Ms;
    S.noalias() -= V * lam.asDiagonal() * V.transpose();
  } else {
    eig.pairs(n_neg + 1, n, true, lam, V);
    S.noalias() = V * lam.asDiagonal() * V.transpose();
  }
  return 0.5 * (S + S.transpose());
}

double min_eigenvalue(const MatX& M) {
  const TridiagonalEig eig(0.5 * (M + M.transpose()));
  VecX v;
  MatX unused;
  eig.pairs(1, 1, false, v, unused);
  return v[0];
}

namespace {

// Applies the closed-form inverse to F (L x 3).
template <class F>
void for_each_coupled(const RotatedData& rd, int l, F&& f) {
  const auto [r, c] = rd.Z[l];
  const auto& th = rd.theta;
  for (int i = 0; i < r; ++i) f(rd.index(i, r), -th[c] * th[i]);
  for (int i = r + 1; i <= rd.K; ++i)
    if (i != c) f(rd.index(r, i), th[c] * th[i]);
  for (int i = 0; i < c; ++i)
    if (i != r) f(rd.index(i, c), th[r] * th[i]);
  for (int i = c + 1; i <= rd.K; ++i) f(rd.index(c, i), -th[r] * th[i]);
}

}  // namespace

MatX affine_system_matrix(const RotatedData& rd) {
  const int L = rd.L();
  MatX A = MatX::Zero(L, L);
  for (int l = 0; l < L; ++l) {
    A(l, l) = 4.0;
    for_each_coupled(rd, l, [&](int u, double v) { A(l, u) = v; });
  }
  return A;
}

MatX affine_system_inverse(const RotatedData& rd) {
  const int L = rd.L();
  const double p1 = (rd.K + 1.0) / (2.0 * rd.K + 6.0), p2 = 1.0 / (2.0 * rd.K + 6.0);
  MatX P = MatX::Zero(L, L);
  for (int l = 0; l < L; ++l) {
    P(l, l) = p1;
    for_each_coupled(rd, l, [&](int u, double v) { P(u, l) = -p2 * v; });
  }
  return P;
}

MatX project_affine(const MatX& M, const RotatedData& rd) {
  const int K = rd.K, n = rd.dim(), L = rd.L();
  if (M.rows() != n || M.cols() != n) throw std::invalid_argument("project_affine: dimension mismatch");
  MatX H = M - rd.Qbar;
  H.block<4, 4>(0, 0) += rd.mu_hat * Mat4::Identity();
  MatX D = MatX::Zero(n, n);
  const auto& th = rd.theta;

  // diagonal matrix parts: remove the mean
  Mat3 mean = Mat3::Zero();
  for (int k = 0; k <= K; ++k) mean += H.block<3, 3>(4 * k, 4 * k);
  mean /= (K + 1.0);
  for (int k = 0; k <= K; ++k) {
    const Mat3 m = H.block<3, 3>(4 * k, 4 * k) - mean;
    D.block<3, 3>(4 * k, 4 * k) = 0.5 * (m + m.transpose());
    D(4 * k + 3, 4 * k + 3) = rd.s_fixed[k];
  }

  // off-diagonal matrix parts: nearest skew matrix; scalar parts stay zero
  for (const auto& [r, c] : rd.Z) {
    const Mat3 h = H.block<3, 3>(4 * r, 4 * c);
    const Mat3 sk = 0.5 * (h - h.transpose());
    D.block<3, 3>(4 * r, 4 * c) = sk;
    D.block<3, 3>(4 * c, 4 * r) = sk.transpose();
  }

  // off-diagonal vector parts
  Eigen::Matrix<double, Eigen::Dynamic, 3> F(L, 3), X(L, 3);
  for (int l = 0; l < L; ++l) {
    const auto [r, c] = rd.Z[l];
    const Vec3 f = H.block<3, 1>(4 * r, 4 * c + 3) - H.block<3, 1>(4 * c, 4 * r + 3) +
                   th[r] * th[c] *
                       (rd.phi[r] - rd.phi[c] - H.block<3, 1>(4 * r, 4 * r + 3) + H.block<3, 1>(4 * c, 4 * c + 3));
    F.row(l) = f.transpose();
  }
  const double p1 = (K + 1.0) / (2.0 * K + 6.0), p2 = 1.0 / (2.0 * K + 6.0);
  for (int l = 0; l < L; ++l) {
    Eigen::RowVector3d x = p1 * F.row(l);
    for_each_coupled(rd, l, [&](int u, double v) { x -= p2 * v * F.row(u); });
    X.row(l) = x;
  }
  std::vector<Vec3> diag_v(rd.phi);
  for (int l = 0; l < L; ++l) {
    const auto [r, c] = rd.Z[l];
    const Vec3 x = X.row(l).transpose();
    D.block<3, 1>(4 * r, 4 * c + 3) = x;
    D.block<1, 3>(4 * r + 3, 4 * c) = -x.transpose();
    D.block<3, 1>(4 * c, 4 * r + 3) = -x;
    D.block<1, 3>(4 * c + 3, 4 * r) = x.transpose();
    // block row r holds +x at column c, block row c holds -x at column r
    diag_v[r] -= th[r] * th[c] * x;
    diag_v[c] += th[c] * th[r] * x;
  }
  for (int k = 0; k <= K; ++k) {
    D.block<3, 1>(4 * k, 4 * k + 3) = diag_v[k];
    D.block<1, 3>(4 * k + 3, 4 * k) = diag_v[k].transpose();
  }

  D += rd.Qbar;
  D.block<4, 4>(0, 0) -= rd.mu_hat * Mat4::Identity();
  return D;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::certified: return "certified";
    case Verdict::suboptimal: return "suboptimal";
    case Verdict::budget_exhausted: return "budget_exhausted";
  }
  return "unknown";
}

Certificate certify(const QcqpData& d, const CandidateSolution& c, const CertifyOptions& opts) {
  if (!(opts.gamma > 0.0 && opts.gamma < 2.0)) throw std::invalid_argument("gamma must lie in (0,2)");
  if (!d.Q.allFinite()) throw std::invalid_argument("non-finite Q");
  const RotatedData rd = rotate_problem(d, c);
  Certificate cert;
  cert.mu_hat = c.mu_hat;
  cert.stationarity_violation = stationarity_violation(rd);
  cert.stationary = cert.stationarity_violation <= opts.stationarity_tol;
  for (int k = 1; k <= rd.K; ++k) {
    const double r2 = rd.xi[k].squaredNorm();
    if ((rd.theta[k] > 0 && r2 > rd.cbar_sq * (1 + 1e-9)) || (rd.theta[k] < 0 && r2 < rd.cbar_sq * (1 - 1e-9)))
      cert.theta_consistent = false;
  }

  const double denom_norm = std::max(c.mu_hat, rd.cbar_sq);
  double best_gap = std::numeric_limits<double>::infinity();
  auto record = [&](double lam) {
    cert.min_eigenvalue_trace.push_back(lam);
    best_gap = std::min(best_gap, (rd.K + 1) * std::max(0.0, -lam));
    cert.gap_bound = best_gap;
    cert.eta_normalized = best_gap / denom_norm;
    cert.eta = best_gap == 0.0 ? 0.0 : (c.mu_hat > 0.0 ? best_gap / c.mu_hat : std::numeric_limits<double>::infinity());
    return cert.eta_normalized < opts.eta_target;
  };

  MatX M = initial_dual_guess(rd);
  if (record(min_eigenvalue(M))) {
    cert.verdict = Verdict::certified;
    return cert;
  }
  if (opts.early_reject && (!cert.theta_consistent || !cert.stationary)) {
    cert.verdict = Verdict::suboptimal;
    cert.note = !cert.theta_consistent ? "theta disagrees with the residual threshold" : "candidate is not stationary";
    return cert;
  }

  for (int t = 0; t < opts.max_iterations; ++t) {
    const MatX S = project_psd(M);
    const MatX Lm = project_affine(2.0 * S - M, rd);
    cert.iterations_used = t + 1;
    if (record(min_eigenvalue(Lm))) {
      cert.verdict = Verdict::certified;
      return cert;
    }
    const double step = (Lm - S).norm();
    if (step < opts.fixed_point_tol) {
      cert.verdict = Verdict::suboptimal;
      cert.note = "fixed point reached without certificate";
      return cert;
    }
    M += opts.gamma * (Lm - S);
  }
  cert.verdict = Verdict::budget_exhausted;
  return cert;
}

Certificate certify(const RotationProblem& p, const RotationSolution& s, const CertifyOptions& opts) {
  const QcqpData d = build_Q(p);
  return certify(d, make_candidate(d, s.rotation, s.theta), opts);
}

}  // namespace robreg
