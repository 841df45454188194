#include "svga/metrics.hpp"

#include "svga/kernels.hpp"
#include "svga/model.hpp"
#include "svga/optim.hpp"
#include "svga/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace svga {

namespace {

// Indices of the k largest scores, ties by ascending feature index.
std::vector<index_t> top_k(const Mat& xhat, index_t node, int k) {
  const index_t m = xhat.cols();
  std::vector<index_t> order(m);
  std::iota(order.begin(), order.end(), index_t(0));
  const auto cmp = [&](index_t a, index_t b) {
    const real_t sa = xhat(node, a), sb = xhat(node, b);
    return sa > sb || (sa == sb && a < b);
  };
  const index_t kk = std::min<index_t>(k, m);
  std::partial_sort(order.begin(), order.begin() + kk, order.end(), cmp);
  order.resize(kk);
  return order;
}

index_t row_nnz(const Mat& x, index_t node) {
  return (x.row(node).array() != real_t(0)).count();
}

}  // namespace

real_t recall_at_k(const Mat& xhat, const Mat& x_true, const std::vector<index_t>& nodes,
                   int k, index_t* skipped) {
  if (k <= 0) throw std::invalid_argument("k must be positive");
  check_shape(xhat.rows() == x_true.rows() && xhat.cols() == x_true.cols(), "recall_at_k");
  real_t sum = 0;
  index_t counted = 0, skip = 0;
  for (const index_t i : nodes) {
    const index_t nnz = row_nnz(x_true, i);
    if (nnz == 0) {
      ++skip;
      continue;
    }
    index_t hits = 0;
    for (const index_t j : top_k(xhat, i, k)) {
      if (x_true(i, j) == real_t(1)) ++hits;
    }
    sum += static_cast<real_t>(hits) / static_cast<real_t>(nnz);
    ++counted;
  }
  if (skipped) *skipped = skip;
  return counted > 0 ? sum / static_cast<real_t>(counted) : real_t(0);
}

real_t ndcg_at_k(const Mat& xhat, const Mat& x_true, const std::vector<index_t>& nodes,
                 int k, index_t* skipped) {
  if (k <= 0) throw std::invalid_argument("k must be positive");
  check_shape(xhat.rows() == x_true.rows() && xhat.cols() == x_true.cols(), "ndcg_at_k");
  real_t sum = 0;
  index_t counted = 0, skip = 0;
  for (const index_t i : nodes) {
    const index_t nnz = row_nnz(x_true, i);
    if (nnz == 0) {
      ++skip;
      continue;
    }
    real_t dcg = 0;
    const auto ranked = top_k(xhat, i, k);
    for (std::size_t j = 0; j < ranked.size(); ++j) {
      if (x_true(i, ranked[j]) == real_t(1)) {
        dcg += real_t(1) / std::log2(static_cast<real_t>(j) + 2);
      }
    }
    real_t ideal = 0;
    const index_t ideal_terms = std::min<index_t>(k, nnz);
    for (index_t j = 0; j < ideal_terms; ++j) {
      ideal += real_t(1) / std::log2(static_cast<real_t>(j) + 2);
    }
    sum += dcg / ideal;
    ++counted;
  }
  if (skipped) *skipped = skip;
  return counted > 0 ? sum / static_cast<real_t>(counted) : real_t(0);
}

real_t rmse(const Mat& xhat, const Mat& x, const std::vector<index_t>& nodes) {
  if (nodes.empty()) throw std::invalid_argument("rmse: empty node set");
  check_shape(xhat.rows() == x.rows() && xhat.cols() == x.cols(), "rmse");
  real_t sum = 0;
  for (const index_t i : nodes) {
    sum += std::sqrt((xhat.row(i) - x.row(i)).squaredNorm() /
                     static_cast<real_t>(x.cols()));
  }
  return sum / static_cast<real_t>(nodes.size());
}

real_t corr(const Mat& xhat, const Mat& x, const std::vector<index_t>& nodes,
            index_t* skipped_features) {
  if (nodes.empty()) throw std::invalid_argument("corr: empty node set");
  check_shape(xhat.rows() == x.rows() && xhat.cols() == x.cols(), "corr");
  const index_t m = x.cols();
  real_t sum = 0;
  index_t counted = 0, skip = 0;
  for (index_t j = 0; j < m; ++j) {
    real_t mean = 0;
    for (const index_t i : nodes) mean += x(i, j);
    mean /= static_cast<real_t>(nodes.size());
    real_t sse = 0, sst = 0;
    for (const index_t i : nodes) {
      sse += (xhat(i, j) - x(i, j)) * (xhat(i, j) - x(i, j));
      sst += (x(i, j) - mean) * (x(i, j) - mean);
    }
    if (sst < real_t(1e-12)) {
      ++skip;
      continue;
    }
    sum += real_t(1) - sse / sst;
    ++counted;
  }
  if (skipped_features) *skipped_features = skip;
  return counted > 0 ? sum / static_cast<real_t>(counted) : real_t(0);
}

Classifier classifier_from_string(const std::string& s) {
  if (s == "mlp") return Classifier::mlp;
  if (s == "gcn") return Classifier::gcn;
  throw std::invalid_argument("unknown classifier: " + s + " (expected mlp|gcn)");
}

Graph induced_subgraph(const Graph& g, const std::vector<index_t>& nodes) {
  std::vector<index_t> remap(g.n, -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) remap[nodes[i]] = static_cast<index_t>(i);
  std::vector<std::pair<index_t, index_t>> edges;
  for (const auto& [u, v] : g.edges) {
    if (remap[u] >= 0 && remap[v] >= 0) edges.emplace_back(remap[u], remap[v]);
  }
  return build_graph(edges, static_cast<index_t>(nodes.size()));
}

namespace {

// Small 2-layer classifier trained full-batch with Adam; `a` is null for the
// MLP and the induced subgraph's normalized adjacency for the GCN.
struct FoldNet {
  Mat w1, w2;
  Vec b1, b2;
};

real_t train_eval_fold(const Mat& features, const std::vector<index_t>& y,
                       const std::vector<index_t>& train_rows,
                       const std::vector<index_t>& test_rows, index_t num_classes,
                       const NormalizedAdjacency* a, std::uint64_t seed) {
  const index_t n = features.rows();
  const index_t f = features.cols();
  const index_t hidden = 256;
  constexpr real_t kDropout = 0.5;
  constexpr real_t kLr = 0.01;
  constexpr int kEpochs = 200;

  Rng init_rng = Rng::stream(seed, RngStream::init, /*salt=*/0xC1F5);
  const auto glorot = [&](index_t rows, index_t cols) {
    const real_t limit = std::sqrt(real_t(6) / static_cast<real_t>(rows + cols));
    Mat m(rows, cols);
    for (index_t i = 0; i < rows * cols; ++i) {
      m.data()[i] = static_cast<real_t>(init_rng.uniform(-limit, limit));
    }
    return m;
  };
  FoldNet net{glorot(f, hidden), glorot(hidden, num_classes), Vec::Zero(hidden),
              Vec::Zero(num_classes)};

  AdamState adam;
  std::vector<TensorView> params = {view(net.w1), view(net.b1), view(net.w2), view(net.b2)};
  adam.init(params);
  Rng drop_rng = Rng::stream(seed, RngStream::dropout, /*salt=*/0xC1F5);

  const auto forward = [&](bool training, Rng& rng, Mat* h1_out, DropoutResult* drop_out) {
    Mat h1pre = a ? spmm(a->csr, Mat(features * net.w1)) : Mat(features * net.w1);
    h1pre.rowwise() += net.b1.transpose();
    Mat h1 = relu(h1pre);
    DropoutResult drop = dropout(h1, kDropout, training, rng);
    Mat logits_pre = a ? spmm(a->csr, drop.out) : drop.out;
    Mat logits = logits_pre * net.w2;
    logits.rowwise() += net.b2.transpose();
    if (h1_out) *h1_out = std::move(h1);
    if (drop_out) *drop_out = std::move(drop);
    return logits;
  };

  for (int epoch = 0; epoch < kEpochs; ++epoch) {
    Mat h1;
    DropoutResult drop;
    Mat logits = forward(true, drop_rng, &h1, &drop);

    // Masked cross-entropy gradient.
    Mat glogits = Mat::Zero(n, num_classes);
    for (const index_t i : train_rows) {
      const real_t mx = logits.row(i).maxCoeff();
      const auto shifted = (logits.row(i).array() - mx).eval();
      const real_t lse = std::log(shifted.exp().sum());
      glogits.row(i) = (shifted - lse).exp();
      glogits(i, y[i]) -= real_t(1);
    }

    Mat g_pre = a ? spmm(a->csr, glogits) : glogits;  // adjoint of the second hop
    Mat gw2 = (a ? spmm(a->csr, drop.out) : drop.out).transpose() * glogits;
    Vec gb2 = colsum(glogits);
    Mat gdrop = g_pre * net.w2.transpose();
    Mat gh1 = relu_backward(dropout_backward(gdrop, drop), h1);
    Mat gh1pre_in = a ? spmm(a->csr, gh1) : gh1;
    Mat gw1 = features.transpose() * gh1pre_in;
    Vec gb1 = colsum(gh1);

    std::vector<ConstTensorView> grads = {view(gw1), view(gb1), view(gw2), view(gb2)};
    adam_step(params, grads, adam, kLr);
  }

  Rng unused(0);
  Mat logits = forward(false, unused, nullptr, nullptr);
  index_t correct = 0;
  for (const index_t i : test_rows) {
    index_t arg = 0;
    logits.row(i).maxCoeff(&arg);
    if (arg == y[i]) ++correct;
  }
  return test_rows.empty()
             ? real_t(0)
             : static_cast<real_t>(correct) / static_cast<real_t>(test_rows.size());
}

}  // namespace

std::optional<real_t> downstream_classify(const Mat& x_generated,
                                          const std::vector<index_t>& labels,
                                          const std::vector<index_t>& nodes,
                                          const Graph* graph, Classifier clf, int folds,
                                          std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("need at least 2 folds");
  if (nodes.empty()) throw std::invalid_argument("downstream_classify: empty node set");

  // Compact to the evaluated nodes.
  Mat features(static_cast<index_t>(nodes.size()), x_generated.cols());
  std::vector<index_t> y(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    features.row(static_cast<index_t>(i)) = x_generated.row(nodes[i]);
    y[i] = labels[nodes[i]];
  }
  const index_t num_classes = *std::max_element(y.begin(), y.end()) + 1;
  if (*std::min_element(y.begin(), y.end()) == *std::max_element(y.begin(), y.end())) {
    return std::nullopt;  // single-class data: accuracy is meaningless
  }

  NormalizedAdjacency sub_adj;
  const NormalizedAdjacency* a = nullptr;
  if (clf == Classifier::gcn) {
    if (!graph) throw std::invalid_argument("gcn classifier requires the graph");
    sub_adj = normalized_adjacency(induced_subgraph(*graph, nodes));
    a = &sub_adj;
  }

  // Seeded fold partition.
  std::vector<index_t> perm(nodes.size());
  std::iota(perm.begin(), perm.end(), index_t(0));
  Rng fold_rng = Rng::stream(seed, RngStream::folds);
  fold_rng.shuffle(perm);

  real_t acc_sum = 0;
  for (int fold = 0; fold < folds; ++fold) {
    std::vector<index_t> train_rows, test_rows;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      if (static_cast<int>(i % folds) == fold) {
        test_rows.push_back(perm[i]);
      } else {
        train_rows.push_back(perm[i]);
      }
    }
    acc_sum += train_eval_fold(features, y, train_rows, test_rows, num_classes, a,
                               seed + static_cast<std::uint64_t>(fold));
  }
  return acc_sum / static_cast<real_t>(folds);
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["dataset"] = dataset;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["wall_ms"] = wall_ms;
  j["metrics"] = values;
  j["counters"] = counters;
  return j.dump(2) + "\n";
}

MetricsReport MetricsReport::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  MetricsReport r;
  r.dataset = j.at("dataset").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.wall_ms = j.at("wall_ms").get<double>();
  r.values = j.at("metrics").get<std::map<std::string, double>>();
  r.counters = j.at("counters").get<std::map<std::string, index_t>>();
  return r;
}

void MetricsReport::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write metrics report: " + path);
  out << to_json();
}

MetricsReport MetricsReport::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open metrics report: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

MetricsReport evaluate_estimates(const Mat& xhat, const FeatureTable& truth,
                                 const std::vector<index_t>& nodes,
                                 const std::vector<int>& ks) {
  MetricsReport report;
  report.counters["evaluated_nodes"] = static_cast<index_t>(nodes.size());
  if (truth.kind == FeatureKind::continuous) {
    index_t skipped_features = 0;
    report.values["rmse"] = rmse(xhat, truth.x, nodes);
    report.values["corr"] = corr(xhat, truth.x, nodes, &skipped_features);
    report.counters["skipped_constant_features"] = skipped_features;
  } else {
    index_t skipped = 0;
    for (const int k : ks) {
      report.values["recall@" + std::to_string(k)] =
          recall_at_k(xhat, truth.x, nodes, k, &skipped);
      report.values["ndcg@" + std::to_string(k)] =
          ndcg_at_k(xhat, truth.x, nodes, k, &skipped);
    }
    report.counters["skipped_zero_rows"] = skipped;
  }
  return report;
}

}  // namespace svga
