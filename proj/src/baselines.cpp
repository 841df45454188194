#include "svga/baselines.hpp"

namespace svga {

Mat neigh_agg(const Graph& graph, const Mat& features,
              const std::vector<index_t>& observed, int hops) {
  if (observed.empty()) throw std::invalid_argument("neigh_agg: no observed nodes");
  if (hops < 1 || hops > 2) throw std::invalid_argument("neigh_agg: hops must be 1 or 2");
  check_shape(features.rows() == graph.n, "neigh_agg");

  std::vector<char> is_observed(graph.n, 0);
  for (const index_t i : observed) is_observed[i] = 1;

  Vec global_mean = Vec::Zero(features.cols());
  for (const index_t i : observed) global_mean += features.row(i).transpose();
  global_mean /= static_cast<real_t>(observed.size());

  Mat out(graph.n, features.cols());
  for (index_t i = 0; i < graph.n; ++i) {
    index_t count = 0;
    Vec acc = Vec::Zero(features.cols());
    for (index_t p = graph.csr.indptr[i]; p < graph.csr.indptr[i + 1]; ++p) {
      const index_t j = graph.csr.indices[p];
      if (is_observed[j]) {
        acc += features.row(j).transpose();
        ++count;
      }
    }
    if (count > 0) {
      out.row(i) = (acc / static_cast<real_t>(count)).transpose();
    } else {
      out.row(i) = global_mean.transpose();
    }
  }

  if (hops == 2) {
    Mat once = out;
    for (index_t i = 0; i < graph.n; ++i) {
      const index_t deg = graph.csr.indptr[i + 1] - graph.csr.indptr[i];
      if (deg == 0) continue;
      Vec acc = Vec::Zero(features.cols());
      for (index_t p = graph.csr.indptr[i]; p < graph.csr.indptr[i + 1]; ++p) {
        acc += once.row(graph.csr.indices[p]).transpose();
      }
      out.row(i) = (acc / static_cast<real_t>(deg)).transpose();
    }
  }
  return out;
}

}  // namespace svga
