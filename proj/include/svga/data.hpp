// Dataset ingestion: edge lists, feature tables, labels, and the split
// protocols (4:1:5 node split, label-observation sampling).
#pragma once

#include "svga/graph.hpp"
#include "svga/types.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace svga {

enum class FeatureKind { binary, continuous, categorical };

FeatureKind feature_kind_from_string(const std::string& s);
std::string to_string(FeatureKind k);

struct FeatureTable {
  Mat x;  // n x m, dense
  FeatureKind kind = FeatureKind::binary;
  // Observation mask V_x; empty means fully observed. Experiments overwrite
  // it with the train split.
  std::vector<index_t> observed;

  index_t rows() const { return x.rows(); }
  index_t cols() const { return x.cols(); }
};

struct Dataset {
  Graph graph;
  FeatureTable features;
  std::optional<std::vector<index_t>> labels;  // class ids, length n
  std::string name;

  index_t n() const { return graph.n; }
  index_t m() const { return features.cols(); }
  index_t num_classes() const;
};

struct SplitMasks {
  std::vector<index_t> feat_train;
  std::vector<index_t> feat_val;
  std::vector<index_t> feat_test;
  std::vector<index_t> label_observed;  // V_y, possibly empty
};

// Feature file: header `n<TAB>m<TAB>kind`, then a `dense` marker followed by
// n whitespace-separated rows, or a `sparse` marker followed by
// `i<TAB>j<TAB>value` triplets. Labels: `i<TAB>class` lines.
FeatureTable load_features(const std::string& path);
void save_features(const FeatureTable& t, const std::string& path, bool sparse = false);

std::vector<index_t> load_labels(const std::string& path, index_t n);
void save_labels(const std::vector<index_t>& labels, const std::string& path);

Dataset load_dataset(const std::string& edges_path, const std::string& features_path,
                     const std::string& labels_path = "", index_t n_override = 0);

// Seeded uniform shuffle, then contiguous slices. Sizes follow the pinned
// rounding: train and val round up, test takes the remainder
// (n=2708 with 4:1:5 gives 1084/271/1353).
SplitMasks make_splits(index_t n, std::array<int, 3> ratio, std::uint64_t seed);

// Uniform sample of floor(ratio*n) nodes over ALL nodes; overlap with the
// feature-test split is intentional.
std::vector<index_t> sample_label_mask(index_t n, real_t ratio, std::uint64_t seed);

}  // namespace svga
