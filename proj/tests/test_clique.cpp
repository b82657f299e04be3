#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "robreg/clique.hpp"

using namespace robreg;

namespace {

PrunedGraph random_graph(std::mt19937_64& rng, int n, double p) {
  PrunedGraph g(n);
  std::bernoulli_distribution e(p);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (e(rng)) g.add_edge(i, j);
  return g;
}

}  // namespace

TEST_CASE("complete graph") {
  PrunedGraph g(5);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) g.add_edge(i, j);
  const auto r = max_clique(g);
  CHECK(r.vertices == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(r.is_certified_maximum);
}

TEST_CASE("empty graph") {
  CHECK(max_clique(PrunedGraph(0)).vertices.empty());
  CHECK(max_clique(PrunedGraph(3)).vertices.size() == 1);
}

TEST_CASE("two planted cliques with sparse noise") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    PrunedGraph g = random_graph(rng, 15, 0.1);
    std::vector<int> perm(15);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) g.add_edge(perm[a], perm[b]);
    for (int a = 4; a < 11; ++a)
      for (int b = a + 1; b < 11; ++b) g.add_edge(perm[a], perm[b]);
    const auto r = max_clique(g);
    CHECK(r.vertices.size() >= 7);
    CHECK(r.vertices == oracle::clique_bruteforce(g));
  }
}

TEST_CASE("exactness and tie rule against subset enumeration") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 100; ++t) {
    const int n = 4 + t % 12;
    const PrunedGraph g = random_graph(rng, n, 0.3 + 0.4 * (t % 3) / 2.0);
    const auto r = max_clique(g);
    CHECK(is_clique(g, r.vertices));
    CHECK(r.is_certified_maximum);
    CHECK(r.vertices == oracle::clique_bruteforce(g));
    const auto nx = next_clique(g, r.vertices);
    CHECK(nx.vertices == oracle::next_clique_bruteforce(g, r.vertices));
  }
}

TEST_CASE("larger sparse graph with a planted clique") {
  std::mt19937_64 rng(7);
  const int n = 1000;
  PrunedGraph g = random_graph(rng, n, 0.03);
  std::vector<int> planted;
  for (int i = 0; i < 30; ++i) planted.push_back(i * 31 + 3);
  for (std::size_t a = 0; a < planted.size(); ++a)
    for (std::size_t b = a + 1; b < planted.size(); ++b) g.add_edge(planted[a], planted[b]);
  const auto r = max_clique(g);
  CHECK(r.is_certified_maximum);
  CHECK(r.vertices == planted);
}
