// Undirected sparse graph plus the two derived matrices used everywhere:
// the self-loop-normalized adjacency (encoder propagation) and the
// normalized-Laplacian information matrix of the GMRF prior.
#pragma once

#include "svga/csr.hpp"
#include "svga/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace svga {

// Immutable after construction; safe to share across threads.
struct Graph {
  index_t n = 0;
  std::vector<std::pair<index_t, index_t>> edges;  // u < v, deduplicated
  CsrMatrix csr;  // symmetric unit-weight adjacency, each edge stored twice

  index_t degree(index_t u) const { return csr.indptr[u + 1] - csr.indptr[u]; }
};

// Normalized adjacency with self-loops: D~^{-1/2} (A+I) D~^{-1/2}.
struct NormalizedAdjacency {
  CsrMatrix csr;
};

// GMRF prior: information matrix K = I - D^{-1/2} A D^{-1/2} (no self-loop
// augmentation) and a fixed zero bias h, which is never stored. Isolated
// nodes keep the identity row: their D^{-1/2} entry is treated as 0, so
// K[i][i] = 1 with no off-diagonals. K stays symmetric PSD either way.
struct GmrfPrior {
  CsrMatrix k;
};

// Dedups, drops self-loops, symmetrizes. Throws on ids outside [0, n) or
// n <= 0. CSR columns are sorted within each row.
Graph build_graph(const std::vector<std::pair<index_t, index_t>>& edge_list, index_t n);

NormalizedAdjacency normalized_adjacency(const Graph& g);

GmrfPrior gmrf_information_matrix(const Graph& g);

// Log of the unnormalized GMRF density: sum of node potentials
// -0.5*(K+jitter*I)_{ii} z_i^2 (h = 0) plus edge potentials -K_ij z_i z_j,
// each undirected edge counted once. Test oracle only; training never calls
// this. Equals -0.5 z^T (K + jitter*I) z by the potential-product identity.
real_t gmrf_unnormalized_density(const GmrfPrior& prior, real_t jitter, const Vec& z);

// Edge-list file: one `u<TAB>v` pair per line, `#` lines ignored.
// n defaults to max id + 1; pass n > 0 to override.
Graph load_edge_list(const std::string& path, index_t n_override = 0);
void save_edge_list(const Graph& g, const std::string& path);

}  // namespace svga
