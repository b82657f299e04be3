#include "robreg/invariants.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace robreg {

GraphTopology GraphTopology::complete(int n) {
  GraphTopology g;
  g.kind = TopologyKind::complete;
  if (n > 1) g.edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.edges.emplace_back(i, j);
  return g;
}

GraphTopology GraphTopology::chain(int n) {
  GraphTopology g;
  g.kind = TopologyKind::chain;
  for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
  return g;
}

GraphTopology GraphTopology::custom(int n, std::vector<std::pair<int, int>> edges) {
  std::set<std::pair<int, int>> seen;
  for (const auto& [i, j] : edges) {
    if (i < 0 || j >= n || i >= j) throw std::invalid_argument("edge indices must satisfy 0 <= i < j < n");
    if (!seen.insert({i, j}).second) throw std::invalid_argument("duplicate edge");
  }
  GraphTopology g;
  g.kind = TopologyKind::custom;
  g.edges = std::move(edges);
  return g;
}

std::vector<Tim> build_tims(const CorrespondenceSet& c, const GraphTopology& g) {
  const int n = static_cast<int>(c.size());
  std::vector<Tim> out;
  out.reserve(g.edges.size());
  for (const auto& [i, j] : g.edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) throw std::out_of_range("edge index outside correspondence set");
    Tim t;
    t.i = i;
    t.j = j;
    t.a_bar = c.source[j] - c.source[i];
    t.b_bar = c.target[j] - c.target[i];
    t.beta_bar = c.noise_bounds[i] + c.noise_bounds[j];
    out.push_back(t);
  }
  return out;
}

double degenerate_threshold(const std::vector<Point3>& source) {
  if (source.empty()) return 0.0;
  double diam = 0.0;
  if (source.size() <= 4000) {
    for (std::size_t i = 0; i < source.size(); ++i)
      for (std::size_t j = i + 1; j < source.size(); ++j)
        diam = std::max(diam, (source[i] - source[j]).squaredNorm());
    diam = std::sqrt(diam);
  } else {
    Vec3 lo = source[0], hi = source[0];
    for (const auto& p : source) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    diam = (hi - lo).norm();
  }
  return 1e-9 * diam;
}

TrimBuild build_trims(const std::vector<Tim>& tims, double eps_degenerate) {
  TrimBuild out;
  out.trims.reserve(tims.size());
  for (std::size_t k = 0; k < tims.size(); ++k) {
    const Tim& t = tims[k];
    const double na = t.a_bar.norm();
    if (!(na > eps_degenerate) || na == 0.0) {
      out.skipped.push_back(static_cast<int>(k));
      continue;
    }
    Trim r;
    r.i = t.i;
    r.j = t.j;
    r.tim_index = static_cast<int>(k);
    r.s_meas = t.b_bar.norm() / na;
    r.alpha = t.beta_bar / na;
    out.trims.push_back(r);
  }
  return out;
}

MeasurementGraph build_measurement_graph(const CorrespondenceSet& c, const GraphTopology& g) {
  c.validate();
  MeasurementGraph mg;
  mg.n_vertices = static_cast<int>(c.size());
  mg.topology = g;
  mg.tims = build_tims(c, g);
  TrimBuild tb = build_trims(mg.tims, degenerate_threshold(c.source));
  mg.trims = std::move(tb.trims);
  mg.degenerate_tims = std::move(tb.skipped);
  return mg;
}

}  // namespace robreg
