#include "robreg/clique.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace robreg {

PrunedGraph::PrunedGraph(int n) : n_(n), words_((n + 63) / 64) {
  adj_.assign(static_cast<std::size_t>(n_) * words_, 0);
}

void PrunedGraph::add_edge(int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= n_ || j >= n_) throw std::invalid_argument("bad edge");
  if (adjacent(i, j)) return;
  adj_[static_cast<std::size_t>(i) * words_ + (j >> 6)] |= std::uint64_t{1} << (j & 63);
  adj_[static_cast<std::size_t>(j) * words_ + (i >> 6)] |= std::uint64_t{1} << (i & 63);
  kept_.emplace_back(std::min(i, j), std::max(i, j));
  kept_tims_.push_back(-1);
}

int PrunedGraph::degree(int i) const {
  int d = 0;
  for (int w = 0; w < words_; ++w) d += std::popcount(row(i)[w]);
  return d;
}

PrunedGraph prune_by_scale(const MeasurementGraph& g, double s_hat, double cbar_sq) {
  PrunedGraph pg(g.n_vertices);
  const double c = std::sqrt(cbar_sq);
  for (const Trim& t : g.trims) {
    if (std::abs(t.s_meas - s_hat) <= c * t.alpha) {
      pg.add_edge(t.i, t.j);
      pg.set_kept_tim_index(t.tim_index);
    }
  }
  return pg;
}

bool is_clique(const PrunedGraph& g, const std::vector<int>& v) {
  for (std::size_t a = 0; a < v.size(); ++a)
    for (std::size_t b = a + 1; b < v.size(); ++b)
      if (v[a] == v[b] || !g.adjacent(v[a], v[b])) return false;
  return true;
}

namespace {

using Bits = std::vector<std::uint64_t>;

inline void set_bit(Bits& b, int i) { b[i >> 6] |= std::uint64_t{1} << (i & 63); }
inline void clear_bit(Bits& b, int i) { b[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
inline bool any(const Bits& b) {
  for (auto w : b)
    if (w) return true;
  return false;
}
inline int count(const Bits& b) {
  int c = 0;
  for (auto w : b) c += std::popcount(w);
  return c;
}

struct Timeout {};

// Branch and bound over a relabelled copy of the graph. Vertices are relabelled
// so that greedy colouring in label order follows a degeneracy ordering.
class Engine {
 public:
  Engine(const PrunedGraph& g, std::chrono::steady_clock::time_point deadline)
      : n_(g.n_vertices()), w_(g.words()), deadline_(deadline) {
    order_by_degeneracy(g);
    adj_.assign(static_cast<std::size_t>(n_) * w_, 0);
    for (int a = 0; a < n_; ++a) {
      const std::uint64_t* r = g.row(perm_[a]);
      for (int wi = 0; wi < w_; ++wi) {
        std::uint64_t word = r[wi];
        while (word) {
          const int b = wi * 64 + std::countr_zero(word);
          word &= word - 1;
          adj_[static_cast<std::size_t>(a) * w_ + (inv_[b] >> 6)] |= std::uint64_t{1} << (inv_[b] & 63);
        }
      }
    }
  }

  int n() const { return n_; }
  int core(int old) const { return core_[old]; }

  Bits to_local(const Bits& old_bits) const {
    Bits out(w_, 0);
    for (int v = 0; v < n_; ++v)
      if ((old_bits[v >> 6] >> (v & 63)) & 1u) set_bit(out, inv_[v]);
    return out;
  }
  Bits all_local() const {
    Bits b(w_, 0);
    for (int v = 0; v < n_; ++v) set_bit(b, v);
    return b;
  }

  // Largest clique inside P (local labels). Returns old labels, sorted.
  std::vector<int> maximum(const Bits& P, int lower_bound) {
    best_ = lower_bound;
    best_set_.clear();
    stop_at_ = -1;
    cur_.clear();
    expand(P);
    return to_old(best_set_);
  }

  // True if P contains a clique with at least k vertices.
  bool exists(const Bits& P, int k) {
    if (k <= 0) return true;
    if (count(P) < k) return false;
    best_ = k - 1;
    best_set_.clear();
    stop_at_ = k;
    cur_.clear();
    expand(P);
    return static_cast<int>(best_set_.size()) >= k;
  }

  const std::uint64_t* nbr(int local) const { return adj_.data() + static_cast<std::size_t>(local) * w_; }
  int local(int old) const { return inv_[old]; }
  int words() const { return w_; }
  std::vector<int> incumbent() const { return to_old(best_set_); }

 private:
  void order_by_degeneracy(const PrunedGraph& g) {
    std::vector<int> deg(n_);
    int maxd = 0;
    for (int v = 0; v < n_; ++v) maxd = std::max(maxd, deg[v] = g.degree(v));
    std::vector<std::vector<int>> bucket(maxd + 1);
    for (int v = n_ - 1; v >= 0; --v) bucket[deg[v]].push_back(v);
    std::vector<char> removed(n_, 0);
    std::vector<int> removal;
    core_.assign(n_, 0);
    int k = 0;
    for (int cnt = 0; cnt < n_; ++cnt) {
      int d = 0;
      int v = -1;
      for (d = 0; d <= maxd; ++d) {
        while (!bucket[d].empty()) {
          const int c = bucket[d].back();
          bucket[d].pop_back();
          if (!removed[c] && deg[c] == d) {
            v = c;
            break;
          }
        }
        if (v >= 0) break;
      }
      k = std::max(k, d);
      core_[v] = k;
      removed[v] = 1;
      removal.push_back(v);
      const std::uint64_t* r = g.row(v);
      for (int wi = 0; wi < w_; ++wi) {
        std::uint64_t word = r[wi];
        while (word) {
          const int u = wi * 64 + std::countr_zero(word);
          word &= word - 1;
          if (!removed[u]) bucket[--deg[u]].push_back(u);
        }
      }
    }
    perm_.assign(removal.rbegin(), removal.rend());
    inv_.assign(n_, 0);
    for (int a = 0; a < n_; ++a) inv_[perm_[a]] = a;
  }

  std::vector<int> to_old(const std::vector<int>& loc) const {
    std::vector<int> out;
    out.reserve(loc.size());
    for (int a : loc) out.push_back(perm_[a]);
    std::sort(out.begin(), out.end());
    return out;
  }

  void check_time() {
    if ((++nodes_ & 1023u) == 0 && std::chrono::steady_clock::now() > deadline_) throw Timeout{};
  }

  void expand(Bits P) {
    check_time();
    // greedy colouring of P in label order
    std::vector<int> verts, colors;
    verts.reserve(count(P));
    Bits U = P;
    int color = 0;
    while (any(U)) {
      ++color;
      Bits Q = U;
      for (int wi = 0; wi < w_; ++wi) {
        while (Q[wi]) {
          const int v = wi * 64 + std::countr_zero(Q[wi]);
          clear_bit(Q, v);
          clear_bit(U, v);
          const std::uint64_t* r = nbr(v);
          for (int x = wi; x < w_; ++x) Q[x] &= ~r[x];
          verts.push_back(v);
          colors.push_back(color);
        }
      }
    }
    for (int idx = static_cast<int>(verts.size()) - 1; idx >= 0; --idx) {
      if (static_cast<int>(cur_.size()) + colors[idx] <= best_) return;
      const int v = verts[idx];
      cur_.push_back(v);
      Bits NP(w_);
      const std::uint64_t* r = nbr(v);
      bool nonempty = false;
      for (int x = 0; x < w_; ++x) nonempty |= (NP[x] = P[x] & r[x]) != 0;
      if (nonempty) {
        expand(std::move(NP));
      } else if (static_cast<int>(cur_.size()) > best_) {
        best_ = static_cast<int>(cur_.size());
        best_set_ = cur_;
      }
      cur_.pop_back();
      if (stop_at_ > 0 && best_ >= stop_at_) return;
      clear_bit(P, v);
    }
  }

  int n_, w_;
  std::chrono::steady_clock::time_point deadline_;
  std::vector<int> perm_, inv_, core_;
  std::vector<std::uint64_t> adj_;
  std::vector<int> cur_, best_set_;
  int best_ = 0, stop_at_ = -1;
  unsigned nodes_ = 0;
};

// Greedy lexicographic completion: fix the smallest feasible vertex, one
// position at a time, keeping a clique of the target size reachable. With
// `outside` set, the finished clique must contain at least one flagged vertex.
class LexBuilder {
 public:
  LexBuilder(Engine& e, int n, const std::vector<char>* outside) : e_(e), n_(n), outside_(outside) {}

  std::vector<int> run(Bits P_old, int target) {
    std::vector<int> chosen;
    bool have_outside = outside_ == nullptr;
    while (static_cast<int>(chosen.size()) < target) {
      bool advanced = false;
      for (int v = 0; v < n_ && !advanced; ++v) {
        if (!test(P_old, v) || e_.core(v) + 1 < target) continue;
        Bits next = later_neighbours(P_old, v);
        const int need = target - static_cast<int>(chosen.size()) - 1;
        const bool out_ok = have_outside || (*outside_)[v];
        if (out_ok ? e_.exists(e_.to_local(next), need) : exists_with_outside(next, need)) {
          chosen.push_back(v);
          have_outside = out_ok;
          P_old = std::move(next);
          advanced = true;
        }
      }
      if (!advanced) break;
    }
    return chosen;
  }

 private:
  static bool test(const Bits& b, int v) { return (b[v >> 6] >> (v & 63)) & 1u; }

  Bits later_neighbours(const Bits& P_old, int v) const {
    Bits next(P_old.size(), 0);
    const std::uint64_t* r = e_.nbr(e_.local(v));
    for (int u = v + 1; u < n_; ++u) {
      if (!test(P_old, u)) continue;
      const int lu = e_.local(u);
      if ((r[lu >> 6] >> (lu & 63)) & 1u) set_bit(next, u);
    }
    return next;
  }

  bool exists_with_outside(const Bits& P_old, int need) {
    if (need <= 0) return false;
    for (int u = 0; u < n_; ++u) {
      if (!test(P_old, u) || !(*outside_)[u]) continue;
      Bits q(P_old.size(), 0);
      const std::uint64_t* r = e_.nbr(e_.local(u));
      for (int x = 0; x < n_; ++x) {
        if (!test(P_old, x)) continue;
        const int lx = e_.local(x);
        if ((r[lx >> 6] >> (lx & 63)) & 1u) set_bit(q, x);
      }
      if (e_.exists(e_.to_local(q), need - 1)) return true;
    }
    return false;
  }

  Engine& e_;
  int n_;
  const std::vector<char>* outside_;
};

}  // namespace

CliqueResult max_clique(const PrunedGraph& g, std::chrono::milliseconds time_budget) {
  CliqueResult res;
  const int n = g.n_vertices();
  if (n == 0) {
    res.is_certified_maximum = true;
    return res;
  }
  const auto deadline = std::chrono::steady_clock::now() + time_budget;
  Engine e(g, deadline);
  std::vector<int> best;
  try {
    best = e.maximum(e.all_local(), 0);
  } catch (const Timeout&) {
    // keep the better of the search incumbent and a greedy core-ordered clique
    std::vector<int> inc = e.incumbent();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return e.core(a) > e.core(b); });
    for (int v : order) {
      bool ok = true;
      for (int u : best) ok = ok && g.adjacent(u, v);
      if (ok) best.push_back(v);
    }
    std::sort(best.begin(), best.end());
    res.vertices = inc.size() > best.size() ? inc : best;
    res.is_certified_maximum = false;
    return res;
  }
  res.is_certified_maximum = true;
  res.vertices = best;
  try {
    Bits all((n + 63) / 64, 0);
    for (int v = 0; v < n; ++v) set_bit(all, v);
    std::vector<int> lex = LexBuilder(e, n, nullptr).run(all, static_cast<int>(best.size()));
    if (lex.size() == best.size()) res.vertices = lex;
  } catch (const Timeout&) {
  }
  return res;
}

CliqueResult next_clique(const PrunedGraph& g, const std::vector<int>& previous, std::chrono::milliseconds time_budget) {
  CliqueResult res;
  const int n = g.n_vertices();
  const auto deadline = std::chrono::steady_clock::now() + time_budget;
  Engine e(g, deadline);
  std::vector<char> in_prev(n, 0);
  for (int v : previous) in_prev[v] = 1;
  const int W = (n + 63) / 64;

  // Size pass: the answer contains at least one vertex outside `previous`.
  // Treat the outside vertex v as its smallest outside member, so later outside
  // vertices stay allowed but earlier ones are excluded.
  auto candidates_for = [&](int v) {
    Bits P(W, 0);
    for (int u = 0; u < n; ++u) {
      if (u == v || !g.adjacent(u, v)) continue;
      if (!in_prev[u] && u < v) continue;
      set_bit(P, u);
    }
    return P;
  };
  int best_size = 0;
  int first_v = -1;
  try {
    for (int v = 0; v < n; ++v) {
      if (in_prev[v] || e.core(v) + 1 <= best_size) continue;
      const Bits P = candidates_for(v);
      if (count(P) + 1 <= best_size) continue;
      std::vector<int> c = e.maximum(e.to_local(P), best_size - 1);
      if (static_cast<int>(c.size()) + 1 > best_size) {
        best_size = static_cast<int>(c.size()) + 1;
        first_v = v;
      }
    }
    if (first_v < 0) return res;
    std::vector<char> outside(n);
    for (int v = 0; v < n; ++v) outside[v] = !in_prev[v];
    Bits all(W, 0);
    for (int v = 0; v < n; ++v) set_bit(all, v);
    std::vector<int> lex = LexBuilder(e, n, &outside).run(all, best_size);
    if (static_cast<int>(lex.size()) != best_size) return res;
    res.vertices = lex;
    res.is_certified_maximum = true;
  } catch (const Timeout&) {
    res.is_certified_maximum = false;
  }
  return res;
}

}  // namespace robreg
