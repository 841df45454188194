#include "svga/data.hpp"

#include "svga/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace svga {

FeatureKind feature_kind_from_string(const std::string& s) {
  if (s == "binary") return FeatureKind::binary;
  if (s == "continuous") return FeatureKind::continuous;
  if (s == "categorical") return FeatureKind::categorical;
  throw DataError("unknown feature kind: " + s);
}

std::string to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::binary: return "binary";
    case FeatureKind::continuous: return "continuous";
    case FeatureKind::categorical: return "categorical";
  }
  return "?";
}

index_t Dataset::num_classes() const {
  if (!labels || labels->empty()) return 0;
  return *std::max_element(labels->begin(), labels->end()) + 1;
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, index_t lineno, const std::string& what) {
  throw DataError(path + ":" + std::to_string(lineno) + ": " + what);
}

bool next_line(std::istream& in, std::string& line, index_t& lineno) {
  if (!std::getline(in, line)) return false;
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

void validate_binary(const Mat& x, const std::string& path) {
  for (index_t i = 0; i < x.rows(); ++i) {
    for (index_t j = 0; j < x.cols(); ++j) {
      const real_t v = x(i, j);
      if (v != real_t(0) && v != real_t(1)) {
        throw DataError(path + ": non-binary value " + std::to_string(v) + " at (" +
                        std::to_string(i) + "," + std::to_string(j) +
                        ") under kind=binary");
      }
    }
  }
}

}  // namespace

FeatureTable load_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open feature file: " + path);

  std::string line;
  index_t lineno = 0;
  if (!next_line(in, line, lineno)) parse_fail(path, 1, "empty file");

  index_t n = 0, m = 0;
  std::string kind_str;
  {
    std::istringstream hdr(line);
    if (!(hdr >> n >> m >> kind_str)) parse_fail(path, lineno, "expected header `n<TAB>m<TAB>kind`");
  }
  if (n <= 0 || m <= 0) parse_fail(path, lineno, "non-positive dimensions in header");

  FeatureTable t;
  t.kind = feature_kind_from_string(kind_str);
  t.x = Mat::Zero(n, m);

  if (!next_line(in, line, lineno)) parse_fail(path, lineno + 1, "missing dense/sparse marker");
  if (line == "dense") {
    for (index_t i = 0; i < n; ++i) {
      if (!next_line(in, line, lineno)) parse_fail(path, lineno + 1, "missing feature row");
      std::istringstream row(line);
      for (index_t j = 0; j < m; ++j) {
        double v = 0;
        if (!(row >> v)) parse_fail(path, lineno, "row has fewer than m values");
        t.x(i, j) = static_cast<real_t>(v);
      }
      double extra = 0;
      if (row >> extra) parse_fail(path, lineno, "row has more than m values");
    }
  } else if (line == "sparse") {
    while (next_line(in, line, lineno)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream triplet(line);
      index_t i = 0, j = 0;
      double v = 0;
      if (!(triplet >> i >> j >> v)) parse_fail(path, lineno, "expected `i<TAB>j<TAB>value`");
      if (i < 0 || i >= n || j < 0 || j >= m) parse_fail(path, lineno, "index out of range");
      t.x(i, j) = static_cast<real_t>(v);
    }
  } else {
    parse_fail(path, lineno, "expected `dense` or `sparse` marker, got `" + line + "`");
  }

  if (t.kind == FeatureKind::binary) validate_binary(t.x, path);
  return t;
}

void save_features(const FeatureTable& t, const std::string& path, bool sparse) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write feature file: " + path);
  out << t.rows() << '\t' << t.cols() << '\t' << to_string(t.kind) << '\n';
  std::ostringstream buf;
  buf << std::setprecision(17);
  if (sparse) {
    buf << "sparse\n";
    for (index_t i = 0; i < t.rows(); ++i) {
      for (index_t j = 0; j < t.cols(); ++j) {
        if (t.x(i, j) != real_t(0)) {
          buf << i << '\t' << j << '\t' << static_cast<double>(t.x(i, j)) << '\n';
        }
      }
    }
  } else {
    buf << "dense\n";
    for (index_t i = 0; i < t.rows(); ++i) {
      for (index_t j = 0; j < t.cols(); ++j) {
        if (j) buf << ' ';
        buf << static_cast<double>(t.x(i, j));
      }
      buf << '\n';
    }
  }
  out << buf.str();
  if (!out) throw DataError("feature file write failed: " + path);
}

std::vector<index_t> load_labels(const std::string& path, index_t n) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file: " + path);
  std::vector<index_t> labels(n, -1);
  std::string line;
  index_t lineno = 0;
  while (next_line(in, line, lineno)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    index_t i = 0, cls = 0;
    if (!(row >> i >> cls)) parse_fail(path, lineno, "expected `i<TAB>class`");
    if (i < 0 || i >= n) parse_fail(path, lineno, "node id out of range");
    if (cls < 0) parse_fail(path, lineno, "negative class id");
    labels[i] = cls;
  }
  for (index_t i = 0; i < n; ++i) {
    if (labels[i] < 0) {
      throw DataError(path + ": node " + std::to_string(i) + " has no label");
    }
  }
  return labels;
}

void save_labels(const std::vector<index_t>& labels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write label file: " + path);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << i << '\t' << labels[i] << '\n';
  }
}

Dataset load_dataset(const std::string& edges_path, const std::string& features_path,
                     const std::string& labels_path, index_t n_override) {
  Dataset d;
  d.features = load_features(features_path);
  const index_t n = n_override > 0 ? n_override : d.features.rows();
  d.graph = load_edge_list(edges_path, n);
  if (d.features.rows() != d.graph.n) {
    throw DataError("feature rows (" + std::to_string(d.features.rows()) +
                    ") do not match node count (" + std::to_string(d.graph.n) + ")");
  }
  if (!labels_path.empty()) d.labels = load_labels(labels_path, d.graph.n);
  return d;
}

SplitMasks make_splits(index_t n, std::array<int, 3> ratio, std::uint64_t seed) {
  if (n < 10) throw std::invalid_argument("make_splits requires n >= 10");
  const real_t total = static_cast<real_t>(ratio[0] + ratio[1] + ratio[2]);
  const auto ceil_share = [&](int part) {
    return static_cast<index_t>(
        std::ceil(static_cast<real_t>(n) * static_cast<real_t>(part) / total));
  };
  const index_t n_train = ceil_share(ratio[0]);
  const index_t n_val = ceil_share(ratio[1]);
  const index_t n_test = n - n_train - n_val;
  if (n_test <= 0) throw std::invalid_argument("degenerate split ratio");

  std::vector<index_t> perm(n);
  std::iota(perm.begin(), perm.end(), index_t(0));
  Rng rng = Rng::stream(seed, RngStream::splits);
  rng.shuffle(perm);

  SplitMasks masks;
  masks.feat_train.assign(perm.begin(), perm.begin() + n_train);
  masks.feat_val.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
  masks.feat_test.assign(perm.begin() + n_train + n_val, perm.end());
  return masks;
}

std::vector<index_t> sample_label_mask(index_t n, real_t ratio, std::uint64_t seed) {
  if (ratio < 0 || ratio > 1) throw std::invalid_argument("label ratio must be in [0, 1]");
  const index_t count = static_cast<index_t>(std::floor(ratio * static_cast<real_t>(n)));
  std::vector<index_t> perm(n);
  std::iota(perm.begin(), perm.end(), index_t(0));
  Rng rng = Rng::stream(seed, RngStream::splits, /*salt=*/1);
  rng.shuffle(perm);
  std::vector<index_t> mask(perm.begin(), perm.begin() + count);
  std::sort(mask.begin(), mask.end());
  return mask;
}

}  // namespace svga
