#include "svga/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace svga {

Graph build_graph(const std::vector<std::pair<index_t, index_t>>& edge_list, index_t n) {
  if (n <= 0) throw DataError("node count must be positive, got " + std::to_string(n));

  std::vector<std::pair<index_t, index_t>> edges;
  edges.reserve(edge_list.size());
  for (const auto& [u, v] : edge_list) {
    if (u < 0 || u >= n || v < 0 || v >= n) {
      throw DataError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                      ") out of range for n=" + std::to_string(n));
    }
    if (u == v) continue;  // self-loops dropped
    edges.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  Graph g;
  g.n = n;
  g.edges = edges;

  std::vector<index_t> deg(n, 0);
  for (const auto& [u, v] : edges) {
    ++deg[u];
    ++deg[v];
  }
  g.csr.rows = g.csr.cols = n;
  g.csr.indptr.assign(n + 1, 0);
  for (index_t i = 0; i < n; ++i) g.csr.indptr[i + 1] = g.csr.indptr[i] + deg[i];
  g.csr.indices.resize(g.csr.indptr[n]);
  g.csr.values.assign(g.csr.indptr[n], real_t(1));

  std::vector<index_t> fill(g.csr.indptr.begin(), g.csr.indptr.end() - 1);
  for (const auto& [u, v] : edges) {
    g.csr.indices[fill[u]++] = v;
    g.csr.indices[fill[v]++] = u;
  }
  // Sorted edge list plus two ordered passes leaves u's row sorted except
  // for the interleaving of smaller/larger neighbors; sort each row.
  for (index_t i = 0; i < n; ++i) {
    std::sort(g.csr.indices.begin() + g.csr.indptr[i],
              g.csr.indices.begin() + g.csr.indptr[i + 1]);
  }
  return g;
}

NormalizedAdjacency normalized_adjacency(const Graph& g) {
  const index_t n = g.n;
  std::vector<real_t> dinv(n);
  for (index_t i = 0; i < n; ++i) {
    dinv[i] = real_t(1) / std::sqrt(static_cast<real_t>(g.degree(i) + 1));
  }

  NormalizedAdjacency a;
  a.csr.rows = a.csr.cols = n;
  a.csr.indptr.assign(n + 1, 0);
  for (index_t i = 0; i < n; ++i) {
    a.csr.indptr[i + 1] = a.csr.indptr[i] + g.degree(i) + 1;  // +1 self-loop
  }
  a.csr.indices.resize(a.csr.indptr[n]);
  a.csr.values.resize(a.csr.indptr[n]);

  for (index_t i = 0; i < n; ++i) {
    index_t p = a.csr.indptr[i];
    bool self_written = false;
    for (index_t q = g.csr.indptr[i]; q < g.csr.indptr[i + 1]; ++q) {
      const index_t j = g.csr.indices[q];
      if (!self_written && j > i) {
        a.csr.indices[p] = i;
        a.csr.values[p] = dinv[i] * dinv[i];
        ++p;
        self_written = true;
      }
      a.csr.indices[p] = j;
      a.csr.values[p] = dinv[i] * dinv[j];
      ++p;
    }
    if (!self_written) {
      a.csr.indices[p] = i;
      a.csr.values[p] = dinv[i] * dinv[i];
      ++p;
    }
  }
  return a;
}

GmrfPrior gmrf_information_matrix(const Graph& g) {
  const index_t n = g.n;
  std::vector<real_t> dinv(n);
  for (index_t i = 0; i < n; ++i) {
    const index_t d = g.degree(i);
    dinv[i] = d > 0 ? real_t(1) / std::sqrt(static_cast<real_t>(d)) : real_t(0);
  }

  GmrfPrior prior;
  prior.k.rows = prior.k.cols = n;
  prior.k.indptr.assign(n + 1, 0);
  for (index_t i = 0; i < n; ++i) {
    prior.k.indptr[i + 1] = prior.k.indptr[i] + g.degree(i) + 1;
  }
  prior.k.indices.resize(prior.k.indptr[n]);
  prior.k.values.resize(prior.k.indptr[n]);

  for (index_t i = 0; i < n; ++i) {
    index_t p = prior.k.indptr[i];
    bool self_written = false;
    for (index_t q = g.csr.indptr[i]; q < g.csr.indptr[i + 1]; ++q) {
      const index_t j = g.csr.indices[q];
      if (!self_written && j > i) {
        prior.k.indices[p] = i;
        prior.k.values[p] = real_t(1);
        ++p;
        self_written = true;
      }
      prior.k.indices[p] = j;
      prior.k.values[p] = -dinv[i] * dinv[j];
      ++p;
    }
    if (!self_written) {
      prior.k.indices[p] = i;
      prior.k.values[p] = real_t(1);
      ++p;
    }
  }
  return prior;
}

real_t gmrf_unnormalized_density(const GmrfPrior& prior, real_t jitter, const Vec& z) {
  if (jitter <= 0) throw std::invalid_argument("jitter must be positive");
  if (z.size() != prior.k.rows) {
    throw std::invalid_argument("z length does not match prior dimension");
  }
  if (!z.allFinite()) throw NumericalError("non-finite z in gmrf_unnormalized_density");

  const CsrMatrix& k = prior.k;
  real_t log_density = 0;
  for (index_t i = 0; i < k.rows; ++i) {
    for (index_t p = k.indptr[i]; p < k.indptr[i + 1]; ++p) {
      const index_t j = k.indices[p];
      if (j == i) {
        log_density += real_t(-0.5) * (k.values[p] + jitter) * z[i] * z[i];
      } else if (j > i) {  // one potential per undirected edge
        log_density += -k.values[p] * z[i] * z[j];
      }
    }
  }
  return log_density;
}

Graph load_edge_list(const std::string& path, index_t n_override) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list: " + path);

  std::vector<std::pair<index_t, index_t>> edges;
  index_t max_id = -1;
  std::string line;
  index_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    index_t u = 0, v = 0;
    try {
      if (tab == std::string::npos) throw std::invalid_argument("no tab");
      u = std::stoll(line.substr(0, tab));
      v = std::stoll(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected `u<TAB>v`");
    }
    if (u < 0 || v < 0) {
      throw DataError(path + ":" + std::to_string(lineno) + ": negative node id");
    }
    edges.emplace_back(u, v);
    max_id = std::max({max_id, u, v});
  }
  const index_t n = n_override > 0 ? n_override : max_id + 1;
  if (n <= 0) throw DataError(path + ": no edges and no node count override");
  return build_graph(edges, n);
}

void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write edge list: " + path);
  for (const auto& [u, v] : g.edges) out << u << '\t' << v << '\n';
}

}  // namespace svga
