// NeighAgg reference estimator: mean pooling of observed neighbor features.
#pragma once

#include "svga/data.hpp"
#include "svga/graph.hpp"

#include <vector>

namespace svga {

// Estimates every node's features as the mean of its observed neighbors'
// rows; nodes with no observed neighbor get the global observed mean.
// hops=2 averages the 1-hop result once more over all neighbors.
Mat neigh_agg(const Graph& graph, const Mat& features,
              const std::vector<index_t>& observed, int hops = 1);

}  // namespace svga
