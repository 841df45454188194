#include <doctest.h>

#include "support/oracles.hpp"
#include "svga/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

using namespace svga;

TEST_SUITE_BEGIN("metrics");

namespace {

std::vector<index_t> all_nodes(index_t n) {
  std::vector<index_t> v(n);
  std::iota(v.begin(), v.end(), index_t(0));
  return v;
}

// Brute-force rank list: stable sort by (-score, index).
std::vector<index_t> oracle_ranking(const Mat& xhat, index_t node) {
  std::vector<index_t> order(xhat.cols());
  std::iota(order.begin(), order.end(), index_t(0));
  std::stable_sort(order.begin(), order.end(), [&](index_t a, index_t b) {
    return xhat(node, a) > xhat(node, b);
  });
  return order;
}

real_t oracle_recall(const Mat& xhat, const Mat& x, index_t node, int k) {
  const auto order = oracle_ranking(xhat, node);
  index_t hits = 0, nnz = 0;
  for (index_t j = 0; j < x.cols(); ++j) nnz += x(node, j) == 1.0;
  for (int j = 0; j < k && j < static_cast<int>(order.size()); ++j) {
    hits += x(node, order[j]) == 1.0;
  }
  return static_cast<real_t>(hits) / static_cast<real_t>(nnz);
}

real_t oracle_ndcg(const Mat& xhat, const Mat& x, index_t node, int k) {
  const auto order = oracle_ranking(xhat, node);
  index_t nnz = 0;
  for (index_t j = 0; j < x.cols(); ++j) nnz += x(node, j) == 1.0;
  real_t dcg = 0;
  for (int j = 0; j < k && j < static_cast<int>(order.size()); ++j) {
    if (x(node, order[j]) == 1.0) dcg += 1.0 / std::log2(j + 2.0);
  }
  real_t ideal = 0;
  for (index_t j = 0; j < std::min<index_t>(k, nnz); ++j) {
    ideal += 1.0 / std::log2(static_cast<real_t>(j) + 2.0);
  }
  return dcg / ideal;
}

}  // namespace

TEST_CASE("recall@3 worked example scores 2/3") {
  Mat x(1, 5), xhat(1, 5);
  x << 0, 0, 1, 1, 1;
  xhat << 0.1, 0.7, 0.2, 0.8, 0.9;
  CHECK(recall_at_k(xhat, x, {0}, 3) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("recall edge cases: perfect scores, skipped zero rows, bad k") {
  Mat x(2, 4), xhat(2, 4);
  x << 1, 0, 1, 0, 0, 0, 0, 0;  // second row all-zero: skipped
  xhat << 9, 1, 8, 2, 1, 2, 3, 4;
  index_t skipped = 0;
  CHECK(recall_at_k(xhat, x, all_nodes(2), 2, &skipped) == doctest::Approx(1.0));
  CHECK(skipped == 1);
  CHECK_THROWS_AS(recall_at_k(xhat, x, all_nodes(2), 0), std::invalid_argument);
}

TEST_CASE("random-score recall approximates the hypergeometric mean k/m") {
  Rng rng(17);
  const index_t m = 20, k = 5;
  real_t acc = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    Mat x = Mat::Zero(1, m);
    std::vector<index_t> ids(m);
    std::iota(ids.begin(), ids.end(), index_t(0));
    rng.shuffle(ids);
    for (int j = 0; j < 5; ++j) x(0, ids[j]) = 1;  // ||x||_0 = 5
    const Mat xhat = test::random_matrix(1, m, rng);
    acc += recall_at_k(xhat, x, {0}, k);
  }
  CHECK(acc / trials == doctest::Approx(0.25).epsilon(0.08));
}

TEST_CASE("ndcg: perfect ranking, worked example vs brute force, determinism") {
  Mat x(1, 5), xhat(1, 5);
  x << 0, 0, 1, 1, 1;
  xhat << 0, 0, 3, 2, 1;
  CHECK(ndcg_at_k(xhat, x, {0}, 3) == doctest::Approx(1.0));

  xhat << 0.1, 0.7, 0.2, 0.8, 0.9;
  CHECK(ndcg_at_k(xhat, x, {0}, 3) == doctest::Approx(oracle_ndcg(xhat, x, 0, 3)));

  // All-equal scores: tie-break by feature index makes the value reproducible.
  const Mat flat = Mat::Zero(1, 5);
  const real_t first = ndcg_at_k(flat, x, {0}, 3);
  CHECK(ndcg_at_k(flat, x, {0}, 3) == first);
}

TEST_CASE("ranking metrics match brute-force oracles on random instances") {
  Rng rng(19);
  const index_t n = 10, m = 20;
  Mat x = Mat::Zero(n, m);
  for (index_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform() < 0.25 ? 1.0 : 0.0;
  x(3, 7) = 1;  // no all-zero rows in this fixture
  const Mat xhat = test::random_matrix(n, m, rng);

  for (const int k : {1, 5, 10}) {
    real_t rec = 0, nd = 0;
    index_t counted = 0;
    for (index_t i = 0; i < n; ++i) {
      if ((x.row(i).array() == 1.0).count() == 0) continue;
      rec += oracle_recall(xhat, x, i, k);
      nd += oracle_ndcg(xhat, x, i, k);
      ++counted;
    }
    CHECK(recall_at_k(xhat, x, all_nodes(n), k) ==
          doctest::Approx(rec / counted).epsilon(1e-10));
    CHECK(ndcg_at_k(xhat, x, all_nodes(n), k) ==
          doctest::Approx(nd / counted).epsilon(1e-10));
  }
}

TEST_CASE("ranking metrics are invariant to strictly monotone score transforms") {
  Rng rng(23);
  const index_t n = 6, m = 12;
  Mat x = Mat::Zero(n, m);
  for (index_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform() < 0.3 ? 1.0 : 0.0;
  x(0, 0) = 1;
  const Mat xhat = test::random_matrix(n, m, rng);
  const Mat affine = 2.0 * xhat.array() + 1.0;
  const Mat expd = xhat.array().exp();

  for (const int k : {3, 7}) {
    const real_t base_r = recall_at_k(xhat, x, all_nodes(n), k);
    CHECK(recall_at_k(affine, x, all_nodes(n), k) == base_r);
    CHECK(recall_at_k(expd, x, all_nodes(n), k) == base_r);
    const real_t base_n = ndcg_at_k(xhat, x, all_nodes(n), k);
    CHECK(ndcg_at_k(affine, x, all_nodes(n), k) == base_n);
    CHECK(ndcg_at_k(expd, x, all_nodes(n), k) == base_n);
  }
}

TEST_CASE("rmse and corr: exact fit, column-mean predictor, dense oracle") {
  Rng rng(29);
  const index_t n = 10, m = 4;
  const Mat x = test::random_matrix(n, m, rng);
  const auto nodes = all_nodes(n);

  CHECK(rmse(x, x, nodes) == doctest::Approx(0.0));
  CHECK(corr(x, x, nodes) == doctest::Approx(1.0));

  Mat col_means(n, m);
  for (index_t j = 0; j < m; ++j) col_means.col(j).setConstant(x.col(j).mean());
  CHECK(corr(col_means, x, nodes) == doctest::Approx(0.0).epsilon(1e-12));

  const Mat xhat = test::random_matrix(n, m, rng);
  real_t rmse_oracle = 0;
  for (index_t i = 0; i < n; ++i) {
    real_t sq = 0;
    for (index_t j = 0; j < m; ++j) sq += (xhat(i, j) - x(i, j)) * (xhat(i, j) - x(i, j));
    rmse_oracle += std::sqrt(sq / m);
  }
  rmse_oracle /= n;
  CHECK(rmse(xhat, x, nodes) == doctest::Approx(rmse_oracle).epsilon(1e-10));

  real_t corr_oracle = 0;
  for (index_t j = 0; j < m; ++j) {
    real_t mean = x.col(j).mean(), sse = 0, sst = 0;
    for (index_t i = 0; i < n; ++i) {
      sse += (xhat(i, j) - x(i, j)) * (xhat(i, j) - x(i, j));
      sst += (x(i, j) - mean) * (x(i, j) - mean);
    }
    corr_oracle += 1.0 - sse / sst;
  }
  corr_oracle /= m;
  CHECK(corr(xhat, x, nodes) == doctest::Approx(corr_oracle).epsilon(1e-10));

  // Constant features are skipped and counted.
  Mat with_const = x;
  with_const.col(1).setConstant(3.0);
  index_t skipped = 0;
  corr(xhat, with_const, nodes, &skipped);
  CHECK(skipped == 1);
}

TEST_CASE("downstream MLP separates one-hot label features perfectly") {
  const index_t n = 100, c = 4;
  std::vector<index_t> labels(n);
  Mat features = Mat::Zero(n, c);
  for (index_t i = 0; i < n; ++i) {
    labels[i] = i % c;
    features(i, labels[i]) = 1;
  }
  const auto acc =
      downstream_classify(features, labels, all_nodes(n), nullptr, Classifier::mlp, 5, 0);
  REQUIRE(acc.has_value());
  CHECK(*acc == doctest::Approx(1.0));
}

TEST_CASE("downstream accuracy is chance-level for random balanced labels") {
  Rng rng(31);
  const index_t n = 400;
  std::vector<index_t> labels(n);
  for (index_t i = 0; i < n; ++i) labels[i] = static_cast<index_t>(rng.below(2));
  const Mat features = test::random_matrix(n, 8, rng);  // uninformative
  const auto acc =
      downstream_classify(features, labels, all_nodes(n), nullptr, Classifier::mlp, 5, 1);
  REQUIRE(acc.has_value());
  CHECK(std::abs(*acc - 0.5) < 0.07);
}

TEST_CASE("downstream classifier reports n/a on single-class data") {
  const index_t n = 30;
  std::vector<index_t> labels(n, 0);
  Mat features = Mat::Identity(n, n);
  CHECK(!downstream_classify(features, labels, all_nodes(n), nullptr, Classifier::mlp, 5, 0)
             .has_value());
}

TEST_CASE("downstream GCN runs on the induced subgraph") {
  Rng rng(37);
  const Graph g = test::random_graph(60, 0.12, rng);
  std::vector<index_t> labels(60);
  Mat features = Mat::Zero(60, 3);
  for (index_t i = 0; i < 60; ++i) {
    labels[i] = i % 3;
    features(i, labels[i]) = 1;
  }
  std::vector<index_t> nodes;
  for (index_t i = 0; i < 40; ++i) nodes.push_back(i);
  const auto acc =
      downstream_classify(features, labels, nodes, &g, Classifier::gcn, 5, 2);
  REQUIRE(acc.has_value());
  CHECK(*acc > 0.8);  // separable features, structure irrelevant
  CHECK_THROWS_AS(
      downstream_classify(features, labels, nodes, nullptr, Classifier::gcn, 5, 2),
      std::invalid_argument);
}

TEST_CASE("induced subgraph keeps exactly the internal edges") {
  const Graph g = build_graph({{0, 1}, {1, 2}, {2, 3}, {3, 0}, {1, 4}}, 5);
  const Graph sub = induced_subgraph(g, {0, 1, 2});
  CHECK(sub.n == 3);
  CHECK(sub.edges.size() == 2);  // (0,1) and (1,2) survive
}

TEST_CASE("metrics report serializes stably and round-trips") {
  MetricsReport r;
  r.dataset = "toy";
  r.seed = 7;
  r.config_hash = "abc123";
  r.wall_ms = 12.5;
  r.values["recall@10"] = 0.25;
  r.values["ndcg@10"] = 0.33;
  r.counters["evaluated_nodes"] = 5;

  const std::string text = r.to_json();
  CHECK(r.to_json() == text);  // stable
  const MetricsReport back = MetricsReport::from_json(text);
  CHECK(back.values == r.values);
  CHECK(back.dataset == r.dataset);

  r.save("report_tmp.json");
  const MetricsReport loaded = MetricsReport::load("report_tmp.json");
  CHECK(loaded.to_json() == text);
  std::remove("report_tmp.json");
}

TEST_SUITE_END();
