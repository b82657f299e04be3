#include "robreg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace robreg {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Largest connected component of the pruned graph (ties: smallest first vertex).
std::vector<int> largest_component(const PrunedGraph& g) {
  const int n = g.n_vertices();
  std::vector<int> comp(n, -1), best;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> members{s}, stack{s};
    comp[s] = s;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int u = 0; u < n; ++u)
        if (comp[u] < 0 && g.adjacent(v, u)) {
          comp[u] = s;
          members.push_back(u);
          stack.push_back(u);
        }
    }
    if (members.size() > best.size()) best = std::move(members);
  }
  std::sort(best.begin(), best.end());
  return best;
}

struct ScaleFit {
  double s_hat;
  std::vector<int> inlier_trims;
};

// Scale TLS over the TRIMs between selected vertices only.
ScaleFit refine_scale(const MeasurementGraph& g, const std::vector<int>& vertices, double cbar_sq, ScaleFit current) {
  std::vector<char> in(g.n_vertices, 0);
  for (int v : vertices) in[v] = 1;
  ScalarTlsProblem sp;
  sp.cbar_sq = cbar_sq;
  std::vector<int> idx;
  for (std::size_t k = 0; k < g.trims.size(); ++k) {
    const Trim& t = g.trims[k];
    if (!in[t.i] || !in[t.j]) continue;
    sp.measurements.push_back(t.s_meas);
    sp.alphas.push_back(t.alpha);
    idx.push_back(static_cast<int>(k));
  }
  if (idx.empty()) return current;
  const ScalarTlsSolution ss = solve_tls(sp);
  if (!(ss.estimate > 0.0)) return current;
  ScaleFit out{ss.estimate, {}};
  for (std::size_t q = 0; q < idx.size(); ++q)
    if (ss.inlier_mask[q]) out.inlier_trims.push_back(idx[q]);
  return out;
}

struct RotationStage {
  std::vector<int> tims;  // indices into g.tims
  RotationProblem problem;
  RotationSolution solution;
  std::optional<Certificate> certificate;
  int certified_tims = 0;
};

RotationStage solve_rotation(const MeasurementGraph& g, const std::vector<int>& vertices, double s_hat,
                             double cbar_sq, const RegisterOptions& opts, double& certify_ms) {
  RotationStage st;
  std::vector<char> in(g.n_vertices, 0);
  for (int v : vertices) in[v] = 1;
  std::vector<char> degenerate(g.tims.size(), 0);
  for (int k : g.degenerate_tims) degenerate[k] = 1;
  for (std::size_t k = 0; k < g.tims.size(); ++k) {
    const Tim& t = g.tims[k];
    if (in[t.i] && in[t.j] && !degenerate[k]) st.tims.push_back(static_cast<int>(k));
  }
  if (st.tims.size() < 2) throw InsufficientInliers();
  st.problem.cbar_sq = cbar_sq;
  for (int k : st.tims) {
    st.problem.a_bars.push_back(s_hat * g.tims[k].a_bar);
    st.problem.b_bars.push_back(g.tims[k].b_bar);
    st.problem.beta_bars.push_back(g.tims[k].beta_bar);
  }
  st.solution = solve_gnc_tls(st.problem, opts.gnc);

  if (opts.certify) {
    const auto t0 = Clock::now();
    st.certificate = certify_rotation(st.problem, st.solution.rotation, opts.certify_max_tims, opts.certify_options);
    st.certified_tims = std::min<int>(static_cast<int>(st.tims.size()), std::max(2, opts.certify_max_tims));
    certify_ms += ms_since(t0);
  }
  return st;
}

}  // namespace

Certificate certify_rotation(const RotationProblem& p, const UnitQuaternion& start, int max_tims,
                             const CertifyOptions& opts) {
  const int K = static_cast<int>(p.size());
  const int cap = std::max(2, max_tims);
  if (K <= cap) return certify(p, refine_tls(p, start, 0), opts);
  RotationProblem sub;
  sub.cbar_sq = p.cbar_sq;
  for (int i = 0; i < cap; ++i) {
    const int k = static_cast<int>(static_cast<long long>(i) * K / cap);
    sub.a_bars.push_back(p.a_bars[k]);
    sub.b_bars.push_back(p.b_bars[k]);
    sub.beta_bars.push_back(p.beta_bars[k]);
  }
  // The candidate must be stationary on the subset, so refine there first.
  Certificate c = certify(sub, refine_tls(sub, start), opts);
  if (!c.note.empty()) c.note += "; ";
  c.note += "certified on " + std::to_string(cap) + " of " + std::to_string(K) + " TIMs";
  return c;
}

TranslationEstimate estimate_translation(const std::vector<Point3>& source, const std::vector<Point3>& target,
                                         double s_hat, const Mat3& R_hat, const std::vector<double>& betas,
                                         double cbar_sq) {
  const std::size_t n = source.size();
  if (target.size() != n || betas.size() != n) throw std::invalid_argument("estimate_translation: size mismatch");
  TranslationEstimate out;
  out.inliers.assign(n, !source.empty());
  for (int l = 0; l < 3; ++l) {
    ScalarTlsProblem p;
    p.cbar_sq = cbar_sq;
    p.alphas = betas;
    p.measurements.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.measurements[i] = (target[i] - s_hat * (R_hat * source[i]))[l];
    if (n == 0) continue;
    const ScalarTlsSolution s = solve_tls(p);
    out.t[l] = s.estimate;
    out.axis_masks[l] = s.inlier_mask;
    for (std::size_t i = 0; i < n; ++i) out.inliers[i] = out.inliers[i] && s.inlier_mask[i];
  }
  return out;
}

RegistrationResult register_clouds(const CorrespondenceSet& c, const TlsConfig& cfg, const RegisterOptions& opts) {
  c.validate();
  if (c.size() < 3) throw std::invalid_argument("registration needs at least 3 correspondences");
  const int n = static_cast<int>(c.size());
  GraphTopology topo;
  switch (opts.topology) {
    case TopologyKind::complete: topo = GraphTopology::complete(n); break;
    case TopologyKind::chain: topo = GraphTopology::chain(n); break;
    case TopologyKind::custom: throw std::invalid_argument("custom topology needs a prebuilt measurement graph");
  }
  return register_clouds(c, build_measurement_graph(c, topo), cfg, opts);
}

RegistrationResult register_clouds(const CorrespondenceSet& c, const MeasurementGraph& g, const TlsConfig& cfg,
                                   const RegisterOptions& opts) {
  c.validate();
  cfg.validate();
  if (c.size() < 3) throw std::invalid_argument("registration needs at least 3 correspondences");
  const auto t_start = Clock::now();
  const double cbar_sq = cfg.cbar_sq;
  const double cbar = std::sqrt(cbar_sq);
  RegistrationResult res;
  StageStats& stats = res.stage_stats;
  StageTimings& tm = res.stage_timings;
  stats.n_tims = static_cast<int>(g.tims.size());
  stats.n_trims = static_cast<int>(g.trims.size());
  stats.degenerate_tims = static_cast<int>(g.degenerate_tims.size());

  // scale
  auto t0 = Clock::now();
  double s_hat = 1.0;
  if (opts.known_scale) {
    if (!(*opts.known_scale > 0.0)) throw std::invalid_argument("known scale must be positive");
    s_hat = *opts.known_scale;
    res.scale_was_known = true;
    for (std::size_t k = 0; k < g.trims.size(); ++k)
      if (std::abs(g.trims[k].s_meas - s_hat) <= cbar * g.trims[k].alpha) res.scale_inlier_trims.push_back(static_cast<int>(k));
  } else {
    if (g.trims.empty()) throw InsufficientInliers();
    ScalarTlsProblem sp;
    sp.cbar_sq = cbar_sq;
    for (const Trim& t : g.trims) {
      sp.measurements.push_back(t.s_meas);
      sp.alphas.push_back(t.alpha);
    }
    const ScalarTlsSolution ss = solve_tls(sp);
    s_hat = ss.estimate;
    for (std::size_t k = 0; k < g.trims.size(); ++k)
      if (ss.inlier_mask[k]) res.scale_inlier_trims.push_back(static_cast<int>(k));
  }
  if (!(s_hat > 0.0)) throw InsufficientInliers();
  tm.scale_ms = ms_since(t0);

  // prune
  t0 = Clock::now();
  const PrunedGraph pruned = prune_by_scale(g, s_hat, cbar_sq);
  stats.edges_kept = static_cast<int>(pruned.kept_edges().size());
  tm.prune_ms = ms_since(t0);

  // inlier candidate set
  t0 = Clock::now();
  const bool use_clique = g.topology.kind == TopologyKind::complete;
  CliqueResult clique;
  if (use_clique) {
    clique = max_clique(pruned, opts.clique_budget);
  } else {
    clique.vertices = largest_component(pruned);
    clique.is_certified_maximum = true;
  }
  tm.clique_ms = ms_since(t0);
  if (clique.vertices.size() < 3) throw InsufficientInliers();

  // scale refit on the clique; rotation, with one retry on the next clique when certification fails
  t0 = Clock::now();
  double certify_ms = 0.0;
  if (opts.refine_scale && !res.scale_was_known) {
    const ScaleFit fit = refine_scale(g, clique.vertices, cbar_sq, {s_hat, res.scale_inlier_trims});
    s_hat = fit.s_hat;
    res.scale_inlier_trims = fit.inlier_trims;
  }
  RotationStage rot = solve_rotation(g, clique.vertices, s_hat, cbar_sq, opts, certify_ms);
  if (opts.certify && use_clique && rot.certificate && rot.certificate->verdict != Verdict::certified) {
    const CliqueResult alt = next_clique(pruned, clique.vertices, opts.clique_budget);
    if (alt.vertices.size() >= 3) {
      try {
        ScaleFit fit{s_hat, res.scale_inlier_trims};
        if (opts.refine_scale && !res.scale_was_known) fit = refine_scale(g, alt.vertices, cbar_sq, fit);
        RotationStage rot2 = solve_rotation(g, alt.vertices, fit.s_hat, cbar_sq, opts, certify_ms);
        if (rot2.certificate && rot2.certificate->verdict == Verdict::certified) {
          rot = std::move(rot2);
          clique = alt;
          s_hat = fit.s_hat;
          res.scale_inlier_trims = fit.inlier_trims;
          stats.used_next_clique = true;
        }
      } catch (const InsufficientInliers&) {
      }
    }
  }
  tm.certify_ms = certify_ms;
  tm.rotation_ms = ms_since(t0) - certify_ms;
  res.clique_vertices = clique.vertices;
  stats.scale_inliers = static_cast<int>(res.scale_inlier_trims.size());
  stats.clique_size = static_cast<int>(clique.vertices.size());
  stats.clique_certified_maximum = clique.is_certified_maximum;
  stats.rotation_tims = static_cast<int>(rot.tims.size());
  stats.gnc_iterations = rot.solution.gnc_iterations;
  stats.rotation_degenerate = rot.solution.degenerate;
  stats.certified_tims = rot.certified_tims;
  for (std::size_t k = 0; k < rot.tims.size(); ++k)
    if (rot.solution.theta[k] > 0) res.rotation_inlier_tims.push_back(rot.tims[k]);
  stats.rotation_inliers = static_cast<int>(res.rotation_inlier_tims.size());
  res.certificate = rot.certificate;

  // translation over the clique vertices
  t0 = Clock::now();
  const Mat3 R_hat = rot.solution.rotation.matrix();
  std::vector<Point3> src, dst;
  std::vector<double> betas;
  for (int v : clique.vertices) {
    src.push_back(c.source[v]);
    dst.push_back(c.target[v]);
    betas.push_back(c.noise_bounds[v]);
  }
  const TranslationEstimate te = estimate_translation(src, dst, s_hat, R_hat, betas, cbar_sq);
  for (std::size_t k = 0; k < clique.vertices.size(); ++k)
    if (te.inliers[k]) res.inlier_indices.push_back(clique.vertices[k]);
  stats.translation_inliers = static_cast<int>(res.inlier_indices.size());
  tm.translation_ms = ms_since(t0);

  res.transform.scale = s_hat;
  res.transform.rotation = rot.solution.rotation;
  res.transform.translation = te.t;
  tm.total_ms = ms_since(t_start);
  return res;
}

}  // namespace robreg
