// Estimation-quality metrics (recall@k, nDCG@k, RMSE, CORR) and the
// downstream node-classification probe over generated features.
#pragma once

#include "svga/data.hpp"
#include "svga/graph.hpp"
#include "svga/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace svga {

// Mean over evaluated nodes of |top-k of xhat  intersect  nonzeros of x| / ||x||_0.
// Ties break by ascending feature index. Nodes with all-zero truth rows are
// skipped; `skipped` (optional) receives the count.
real_t recall_at_k(const Mat& xhat, const Mat& x_true, const std::vector<index_t>& nodes,
                   int k, index_t* skipped = nullptr);

// Per-node DCG@k / ideal DCG@k with the ideal truncated at min(k, ||x||_0).
real_t ndcg_at_k(const Mat& xhat, const Mat& x_true, const std::vector<index_t>& nodes,
                 int k, index_t* skipped = nullptr);

// Mean over nodes of the per-node root-mean-square error over features.
real_t rmse(const Mat& xhat, const Mat& x, const std::vector<index_t>& nodes);

// (1/m) sum_j (1 - SSE_j / SST_j) with the feature mean taken over the
// evaluated nodes; features with SST_j < 1e-12 are skipped and counted.
real_t corr(const Mat& xhat, const Mat& x, const std::vector<index_t>& nodes,
            index_t* skipped_features = nullptr);

enum class Classifier { mlp, gcn };

Classifier classifier_from_string(const std::string& s);

// 5-fold cross-validated node classification on generated features,
// restricted to `nodes`. MLP: 2 layers, hidden 256, ReLU, dropout 0.5,
// Adam lr 0.01, 200 epochs. GCN: 2 layers, hidden 256, on the induced
// subgraph of `nodes` (required for Classifier::gcn). Returns nullopt for
// single-class data.
std::optional<real_t> downstream_classify(const Mat& x_generated,
                                          const std::vector<index_t>& labels,
                                          const std::vector<index_t>& nodes,
                                          const Graph* graph, Classifier clf, int folds,
                                          std::uint64_t seed);

// Induced subgraph over `nodes`; node i of the result is nodes[i].
Graph induced_subgraph(const Graph& g, const std::vector<index_t>& nodes);

struct MetricsReport {
  std::string dataset;
  std::uint64_t seed = 0;
  std::string config_hash;
  double wall_ms = 0;
  std::map<std::string, double> values;     // "recall@10", "ndcg@10", "rmse", "corr", ...
  std::map<std::string, index_t> counters;  // evaluated_nodes, skipped_* bookkeeping

  std::string to_json() const;  // key-sorted, stable
  static MetricsReport from_json(const std::string& text);
  void save(const std::string& path) const;
  static MetricsReport load(const std::string& path);
};

// Ranking metrics at every k for binary features; RMSE/CORR for continuous.
MetricsReport evaluate_estimates(const Mat& xhat, const FeatureTable& truth,
                                 const std::vector<index_t>& nodes,
                                 const std::vector<int>& ks);

}  // namespace svga
