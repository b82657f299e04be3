#include "robreg/scalar_tls.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace robreg {

void ScalarTlsProblem::validate() const {
  if (measurements.empty()) throw std::invalid_argument("scalar TLS needs at least one measurement");
  if (alphas.size() != measurements.size()) throw std::invalid_argument("measurements and alphas differ in length");
  if (!(cbar_sq > 0.0)) throw std::invalid_argument("cbar_sq must be positive");
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    if (!(alphas[k] > 0.0) || !std::isfinite(alphas[k]) || !std::isfinite(measurements[k]))
      throw std::invalid_argument("alpha must be positive and data finite");
  }
}

double tls_objective(const ScalarTlsProblem& p, double s) {
  double f = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double r = (s - p.measurements[k]) / p.alphas[k];
    f += std::min(r * r, p.cbar_sq);
  }
  return f;
}

std::vector<bool> consensus_mask(const ScalarTlsProblem& p, double s) {
  std::vector<bool> m(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double r = (s - p.measurements[k]) / p.alphas[k];
    m[k] = r * r <= p.cbar_sq + 1e-12;
  }
  return m;
}

namespace {

struct Event {
  double x;
  int k;
  bool enter;
};

struct Group {
  double x;
  int begin, end;  // range into the sorted event array
};

struct Sweep {
  std::vector<Event> events;
  std::vector<Group> groups;
  double shift = 0.0;
};

Sweep make_sweep(const ScalarTlsProblem& p) {
  const double c = std::sqrt(p.cbar_sq);
  const int K = static_cast<int>(p.size());
  Sweep sw;
  std::vector<double> tmp(p.measurements);
  std::nth_element(tmp.begin(), tmp.begin() + K / 2, tmp.end());
  sw.shift = tmp[K / 2];
  sw.events.reserve(2 * K);
  for (int k = 0; k < K; ++k) {
    sw.events.push_back({p.measurements[k] - c * p.alphas[k], k, true});
    sw.events.push_back({p.measurements[k] + c * p.alphas[k], k, false});
  }
  std::sort(sw.events.begin(), sw.events.end(), [](const Event& a, const Event& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.enter != b.enter) return a.enter;
    return a.k < b.k;
  });
  int i = 0;
  const int n = static_cast<int>(sw.events.size());
  while (i < n) {
    const double x0 = sw.events[i].x;
    const double tol = 1e-12 * std::max(1.0, std::abs(x0));
    int j = i + 1;
    while (j < n && sw.events[j].x - x0 <= tol) ++j;
    sw.groups.push_back({x0, i, j});
    i = j;
  }
  return sw;
}

struct Sums {
  long double w = 0, ws = 0, wss = 0;
  int n = 0;
  void add(double s, double a, int sign) {
    const long double wk = 1.0L / (static_cast<long double>(a) * a);
    w += sign * wk;
    ws += sign * wk * s;
    wss += sign * wk * s * s;
    n += sign;
  }
  double center() const { return static_cast<double>(ws / w); }
  double residual() const {
    const long double r = wss - ws * ws / w;
    return r > 0 ? static_cast<double>(r) : 0.0;
  }
};

struct Candidate {
  double fast_cost;
  double center;  // unshifted
  int n;
  int group;  // interval (groups[group].x, groups[group+1].x)
};

// Visits every open interval between consecutive distinct boundaries with its
// running sums; measurements are shifted by sw.shift to limit cancellation.
template <class F>
void sweep_intervals(const ScalarTlsProblem& p, const Sweep& sw, F&& visit) {
  Sums sums;
  for (std::size_t g = 0; g + 1 < sw.groups.size(); ++g) {
    for (int e = sw.groups[g].begin; e < sw.groups[g].end; ++e) {
      const Event& ev = sw.events[e];
      sums.add(p.measurements[ev.k] - sw.shift, p.alphas[ev.k], ev.enter ? 1 : -1);
    }
    visit(static_cast<int>(g), sums);
  }
}

std::vector<Candidate> collect_candidates(const ScalarTlsProblem& p, const Sweep& sw) {
  const int K = static_cast<int>(p.size());
  std::vector<Candidate> out;
  out.reserve(sw.groups.size());
  sweep_intervals(p, sw, [&](int g, const Sums& s) {
    if (s.n <= 0) return;
    out.push_back({s.residual() + (K - s.n) * p.cbar_sq, s.center() + sw.shift, s.n, g});
  });
  return out;
}

bool better_tls(double cost_a, int n_a, double est_a, double cost_b, int n_b, double est_b) {
  const double tol = 1e-12 * (1.0 + std::max(std::abs(cost_a), std::abs(cost_b)));
  if (cost_a < cost_b - tol) return true;
  if (cost_b < cost_a - tol) return false;
  if (n_a != n_b) return n_a > n_b;
  return est_a < est_b;
}

int count_true(const std::vector<bool>& m) { return static_cast<int>(std::count(m.begin(), m.end(), true)); }

}  // namespace

ScalarTlsSolution solve_tls(const ScalarTlsProblem& p) {
  p.validate();
  const int K = static_cast<int>(p.size());
  const Sweep sw = make_sweep(p);
  std::vector<Candidate> cands = collect_candidates(p, sw);
  assert(static_cast<int>(cands.size()) <= 2 * K - 1);

  ScalarTlsSolution sol;
  sol.consensus_sets_enumerated = static_cast<int>(cands.size());
  if (cands.empty()) {
    sol.estimate = p.measurements[0];
  } else {
    // Running sums rank the candidates; exact re-evaluation settles near-ties.
    double best_fast = std::numeric_limits<double>::infinity();
    for (const auto& c : cands) best_fast = std::min(best_fast, c.fast_cost);
    const double margin = 1e-7 * (1.0 + std::abs(best_fast));
    std::vector<const Candidate*> close;
    for (const auto& c : cands)
      if (c.fast_cost <= best_fast + margin) close.push_back(&c);
    std::sort(close.begin(), close.end(),
              [](const Candidate* a, const Candidate* b) { return a->fast_cost < b->fast_cost; });
    if (close.size() > 64) close.resize(64);

    bool have = false;
    double best_cost = 0, best_est = 0;
    int best_n = 0;
    for (const Candidate* c : close) {
      const double f = tls_objective(p, c->center);
      const int n = count_true(consensus_mask(p, c->center));
      if (!have || better_tls(f, n, c->center, best_cost, best_n, best_est)) {
        have = true;
        best_cost = f;
        best_est = c->center;
        best_n = n;
      }
    }
    sol.estimate = best_est;
  }
  sol.cost = tls_objective(p, sol.estimate);
  sol.inlier_mask = consensus_mask(p, sol.estimate);
  (void)K;
  return sol;
}

ConsensusMaxSolution solve_consensus_max(const ScalarTlsProblem& p) {
  p.validate();
  const int K = static_cast<int>(p.size());
  const Sweep sw = make_sweep(p);

  // Candidates are open intervals and boundary points, where closed intervals can touch.
  struct Best {
    int n = -1;
    bool point = true;
    double fast_cost = 0, lo = 0, hi = 0;
  } best;
  // Larger set first; an open interval beats a lone boundary point; then cost, then position.
  auto consider = [&](int n, bool point, double fast_cost, double lo, double hi) {
    bool take = n > best.n;
    if (!take && n == best.n) {
      if (point != best.point) {
        take = !point;
      } else {
        const double tol = 1e-12 * (1.0 + std::abs(best.fast_cost));
        take = fast_cost < best.fast_cost - tol ||
               (std::abs(fast_cost - best.fast_cost) <= tol && lo + hi < best.lo + best.hi);
      }
    }
    if (take) best = {n, point, fast_cost, lo, hi};
  };

  Sums sums;
  int enumerated = 0;
  for (std::size_t g = 0; g < sw.groups.size(); ++g) {
    Sums at_point = sums;
    for (int e = sw.groups[g].begin; e < sw.groups[g].end; ++e) {
      const Event& ev = sw.events[e];
      if (ev.enter) at_point.add(p.measurements[ev.k] - sw.shift, p.alphas[ev.k], 1);
    }
    if (at_point.n > 0)
      consider(at_point.n, true, at_point.residual() + (K - at_point.n) * p.cbar_sq, sw.groups[g].x, sw.groups[g].x);
    for (int e = sw.groups[g].begin; e < sw.groups[g].end; ++e) {
      const Event& ev = sw.events[e];
      sums.add(p.measurements[ev.k] - sw.shift, p.alphas[ev.k], ev.enter ? 1 : -1);
    }
    if (g + 1 < sw.groups.size() && sums.n > 0) {
      ++enumerated;
      consider(sums.n, false, sums.residual() + (K - sums.n) * p.cbar_sq, sw.groups[g].x, sw.groups[g + 1].x);
    }
  }

  ConsensusMaxSolution sol;
  sol.consensus_sets_enumerated = enumerated;
  sol.interval_lo = best.lo;
  sol.interval_hi = best.hi;
  sol.estimate = 0.5 * (best.lo + best.hi);
  // Membership is decided geometrically against the winning interval so that
  // boundary-point winners keep intervals that merely touch.
  const double c = std::sqrt(p.cbar_sq);
  sol.inlier_mask.assign(K, false);
  long double w = 0, ws = 0;
  for (int k = 0; k < K; ++k) {
    const double lo = p.measurements[k] - c * p.alphas[k], hi = p.measurements[k] + c * p.alphas[k];
    const double tol = 1e-12 * std::max(1.0, std::abs(sol.estimate));
    if (lo <= best.lo + tol && hi >= best.hi - tol) {
      sol.inlier_mask[k] = true;
      const long double wk = 1.0L / (static_cast<long double>(p.alphas[k]) * p.alphas[k]);
      w += wk;
      ws += wk * p.measurements[k];
    }
  }
  sol.wls_center = static_cast<double>(ws / w);
  sol.cost = tls_objective(p, sol.estimate);
  return sol;
}

McEquivDiagnostics check_mc_equiv_condition(const ScalarTlsProblem& p) {
  const ConsensusMaxSolution mc = solve_consensus_max(p);
  const int K = static_cast<int>(p.size());
  McEquivDiagnostics d;
  d.n_in_max = count_true(mc.inlier_mask);

  const double s_star = std::clamp(mc.wls_center, mc.interval_lo, mc.interval_hi);
  for (int k = 0; k < K; ++k) {
    if (!mc.inlier_mask[k]) continue;
    const double r = (s_star - p.measurements[k]) / p.alphas[k];
    d.r_in += r * r;
  }

  // Every consensus set is seen either on an open interval or at a boundary point.
  const Sweep sw = make_sweep(p);
  Sums sums;
  int in_mc = 0;
  auto other = [&](int n, int n_mc) {
    if (n == d.n_in_max && n_mc == d.n_in_max) return;  // the maximum set itself
    d.second_largest = std::max(d.second_largest, n);
  };
  for (std::size_t g = 0; g < sw.groups.size(); ++g) {
    int pt_n = sums.n, pt_mc = in_mc;
    for (int e = sw.groups[g].begin; e < sw.groups[g].end; ++e) {
      const Event& ev = sw.events[e];
      if (ev.enter) {
        ++pt_n;
        if (mc.inlier_mask[ev.k]) ++pt_mc;
      }
    }
    other(pt_n, pt_mc);
    for (int e = sw.groups[g].begin; e < sw.groups[g].end; ++e) {
      const Event& ev = sw.events[e];
      sums.n += ev.enter ? 1 : -1;
      if (mc.inlier_mask[ev.k]) in_mc += ev.enter ? 1 : -1;
    }
    if (g + 1 < sw.groups.size()) other(sums.n, in_mc);
  }
  d.holds = d.second_largest < d.n_in_max - d.r_in / p.cbar_sq;
  return d;
}

}  // namespace robreg
