#pragma once

#include <chrono>
#include <cstdint>
#include <utility>
#include <vector>

#include "robreg/invariants.hpp"

namespace robreg {

class PrunedGraph {
 public:
  PrunedGraph() = default;
  explicit PrunedGraph(int n);

  int n_vertices() const { return n_; }
  int words() const { return words_; }
  void add_edge(int i, int j);
  bool adjacent(int i, int j) const { return (row(i)[j >> 6] >> (j & 63)) & 1u; }
  const std::uint64_t* row(int i) const { return adj_.data() + static_cast<std::size_t>(i) * words_; }
  int degree(int i) const;

  const std::vector<std::pair<int, int>>& kept_edges() const { return kept_; }
  // Index of each kept edge in the source MeasurementGraph tims (or -1 when built by hand).
  const std::vector<int>& kept_tim_indices() const { return kept_tims_; }
  void set_kept_tim_index(int tim) { kept_tims_.back() = tim; }

 private:
  int n_ = 0, words_ = 0;
  std::vector<std::uint64_t> adj_;
  std::vector<std::pair<int, int>> kept_;
  std::vector<int> kept_tims_;
};

struct CliqueResult {
  std::vector<int> vertices;  // sorted
  bool is_certified_maximum = false;
};

PrunedGraph prune_by_scale(const MeasurementGraph& g, double s_hat, double cbar_sq);

// Exact maximum clique; among several maximum cliques the lexicographically
// smallest sorted vertex list is returned.
CliqueResult max_clique(const PrunedGraph& g,
                        std::chrono::milliseconds time_budget = std::chrono::milliseconds(10000));

// Largest clique that is not contained in `previous` (lexicographically smallest on ties).
CliqueResult next_clique(const PrunedGraph& g, const std::vector<int>& previous,
                         std::chrono::milliseconds time_budget = std::chrono::milliseconds(10000));

bool is_clique(const PrunedGraph& g, const std::vector<int>& vertices);

}  // namespace robreg
