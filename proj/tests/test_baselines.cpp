#include <doctest.h>

#include "support/oracles.hpp"
#include "svga/baselines.hpp"

#include <algorithm>
#include <numeric>

using namespace svga;

TEST_SUITE_BEGIN("baselines");

TEST_CASE("neigh_agg copies a single observed neighbor and falls back to the mean") {
  // 0-1 edge, 2 isolated. Observed: {1, 2}.
  const Graph g = build_graph({{0, 1}}, 3);
  Mat x(3, 2);
  x << 0, 0, 2, 4, 6, 8;
  const Mat out = neigh_agg(g, x, {1, 2});
  CHECK(out(0, 0) == doctest::Approx(2.0));  // node 0: exactly neighbor 1's row
  CHECK(out(0, 1) == doctest::Approx(4.0));
  CHECK(out(2, 0) == doctest::Approx(4.0));  // node 2: global observed mean
  CHECK(out(2, 1) == doctest::Approx(6.0));
}

TEST_CASE("neigh_agg star center averages its observed leaves") {
  const Graph g = build_graph({{0, 1}, {0, 2}, {0, 3}}, 4);
  Mat x = Mat::Zero(4, 3);
  x(1, 0) = 1;
  x(2, 1) = 1;
  x(3, 2) = 1;
  const Mat out = neigh_agg(g, x, {1, 2, 3});
  for (index_t j = 0; j < 3; ++j) CHECK(out(0, j) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("neigh_agg output stays in the observed convex hull componentwise") {
  Rng rng(5);
  const Graph g = test::random_graph(20, 0.2, rng);
  const Mat x = test::random_matrix(20, 4, rng);
  std::vector<index_t> observed = {0, 3, 5, 7, 11, 13, 17};
  const Mat out = neigh_agg(g, x, observed, 1);
  for (index_t j = 0; j < 4; ++j) {
    real_t lo = 1e30, hi = -1e30;
    for (const index_t i : observed) {
      lo = std::min(lo, x(i, j));
      hi = std::max(hi, x(i, j));
    }
    for (index_t i = 0; i < 20; ++i) {
      CHECK(out(i, j) >= lo - 1e-12);
      CHECK(out(i, j) <= hi + 1e-12);
    }
  }
}

TEST_CASE("neigh_agg is permutation equivariant") {
  Rng rng(7);
  const index_t n = 12;
  const Graph g = test::random_graph(n, 0.3, rng);
  const Mat x = test::random_matrix(n, 3, rng);
  const std::vector<index_t> observed = {0, 2, 4, 6, 8};

  // Relabel nodes by a fixed permutation.
  std::vector<index_t> perm(n);
  std::iota(perm.begin(), perm.end(), index_t(0));
  rng.shuffle(perm);
  std::vector<std::pair<index_t, index_t>> edges;
  for (const auto& [u, v] : g.edges) edges.emplace_back(perm[u], perm[v]);
  const Graph gp = build_graph(edges, n);
  Mat xp(n, 3);
  for (index_t i = 0; i < n; ++i) xp.row(perm[i]) = x.row(i);
  std::vector<index_t> obs_p;
  for (const index_t i : observed) obs_p.push_back(perm[i]);

  const Mat out = neigh_agg(g, x, observed);
  const Mat out_p = neigh_agg(gp, xp, obs_p);
  for (index_t i = 0; i < n; ++i) {
    CHECK((out_p.row(perm[i]) - out.row(i)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("neigh_agg rejects an empty observation set and supports 2 hops") {
  const Graph g = build_graph({{0, 1}, {1, 2}}, 3);
  Mat x(3, 1);
  x << 1, 2, 3;
  CHECK_THROWS_AS(neigh_agg(g, x, {}), std::invalid_argument);

  const Mat two_hop = neigh_agg(g, x, {0, 1, 2}, 2);
  CHECK(two_hop.rows() == 3);
  // Node 1 after the second averaging: mean of the 1-hop rows of 0 and 2.
  const Mat one_hop = neigh_agg(g, x, {0, 1, 2}, 1);
  CHECK(two_hop(1, 0) == doctest::Approx(0.5 * (one_hop(0, 0) + one_hop(2, 0))));
}

TEST_SUITE_END();
