// Full-batch training with Adam and validation early stopping, the three
// run variants (det / stoch / noreg), the hyperparameter grid runner, and
// the inference-time scalability bench.
#pragma once

#include "svga/config.hpp"
#include "svga/data.hpp"
#include "svga/metrics.hpp"
#include "svga/model.hpp"
#include "svga/objective.hpp"
#include "svga/optim.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace svga {

struct EpochRecord {
  int epoch = 0;
  real_t l_x = 0;
  real_t l_y = 0;
  real_t l_reg = 0;
  real_t total = 0;
  real_t val_metric = 0;
  double wall_ms = 0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  real_t best_val = 0;

  // Line-delimited records: epoch, l_x, l_y, l_reg, total, val_metric, wall_ms.
  void save(const std::string& path) const;
  static TrainLog load(const std::string& path);
};

struct TrainResult {
  ModelParams best_params;
  TrainLog log;
};

// Called after each epoch with evaluation-mode latents (dropout off, Z = U
// for the stochastic variant). Used by the ablation runner for its curves.
using EpochProbe =
    std::function<void(int epoch, const ModelParams& params, const Mat& z_eval)>;

// Algorithm: per epoch run the variant's forward, assemble the objective,
// take an Adam step, then score `config.val_metric` on the validation nodes
// (their features are hidden from the loss, visible to the metric). Keeps
// the parameters of the best validation epoch; stops after `patience`
// epochs without strict improvement.
TrainResult train(const Graph& graph, const FeatureTable& features,
                  const std::optional<std::vector<index_t>>& labels,
                  const SplitMasks& masks, const TrainConfig& config,
                  const EpochProbe& probe = nullptr);

// Evaluation-mode latents: deterministic encoder output, or the mean head U
// for the stochastic variant (no sampling at inference).
Mat infer_latents(const ModelParams& params, const NormalizedAdjacency& a,
                  const TrainConfig& config);

// Full estimated feature matrix for frozen params.
Mat infer_features(const ModelParams& params, const NormalizedAdjacency& a,
                   const TrainConfig& config);

struct AblationResult {
  Variant variant = Variant::det;
  TrainLog log;
  std::vector<real_t> train_curve;  // per-epoch recall@k on train nodes
  std::vector<real_t> test_curve;   // per-epoch recall@k on test nodes
  real_t best_val_epoch_test = 0;   // test metric at the best validation epoch
  real_t final_train = 0;           // last-epoch train metric
};

// The three variants with identical seed and splits; per-epoch train/test
// metric curves for the variant comparison.
std::vector<AblationResult> run_ablation(const Graph& graph, const FeatureTable& features,
                                         const std::optional<std::vector<index_t>>& labels,
                                         const SplitMasks& masks,
                                         const TrainConfig& base_config);

struct GridSpec {
  std::vector<index_t> dims = {256, 512};
  std::vector<real_t> dropouts = {0.0, 0.5};
  std::vector<real_t> lambdas = {0.01, 0.1, 1.0};
  std::vector<real_t> betas = {0.01, 0.1, 1.0};
  std::vector<bool> unit_norms = {true, false};
};

struct GridEntry {
  TrainConfig config;
  real_t val_metric = 0;
  int best_epoch = 0;
};

struct GridResult {
  std::vector<GridEntry> entries;  // in deterministic sweep order
  std::size_t best_index = 0;
};

// Sweeps the grid with the base config's variant/seed/etc.; best entry by
// validation metric. `workers` > 1 trains configs in parallel (results are
// identical regardless of the worker count).
GridResult run_grid(const Graph& graph, const FeatureTable& features,
                    const std::optional<std::vector<index_t>>& labels,
                    const SplitMasks& masks, const TrainConfig& base_config,
                    const GridSpec& spec, int workers = 1);

struct BenchPoint {
  double fraction = 0;
  index_t edges = 0;
  double mean_ms = 0;
};

struct BenchResult {
  std::vector<BenchPoint> points;
  double slope_ms_per_edge = 0;
  double intercept_ms = 0;
  double r2 = 0;
};

// Nine random edge-subsampled graphs at fractions 0.1..0.9 of |E| (all n
// nodes kept), forward inference timed `repeats` times each, least-squares
// line of mean time vs edge count.
BenchResult bench_scalability(const Graph& graph, index_t m_features,
                              const TrainConfig& config, int repeats, std::uint64_t seed);

}  // namespace svga
