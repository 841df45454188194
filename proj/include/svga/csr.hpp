// Compressed sparse row matrix, the storage behind the graph matrices.
#pragma once

#include "svga/types.hpp"

#include <vector>

namespace svga {

struct CsrMatrix {
  index_t rows = 0;
  index_t cols = 0;
  std::vector<index_t> indptr;   // size rows+1
  std::vector<index_t> indices;  // column ids, sorted within each row
  std::vector<real_t> values;

  index_t nnz() const { return static_cast<index_t>(indices.size()); }

  Mat to_dense() const {
    Mat d = Mat::Zero(rows, cols);
    for (index_t i = 0; i < rows; ++i) {
      for (index_t p = indptr[i]; p < indptr[i + 1]; ++p) {
        d(i, indices[p]) = values[p];
      }
    }
    return d;
  }

  real_t trace() const {
    real_t t = 0;
    for (index_t i = 0; i < rows && i < cols; ++i) {
      for (index_t p = indptr[i]; p < indptr[i + 1]; ++p) {
        if (indices[p] == i) t += values[p];
      }
    }
    return t;
  }
};

}  // namespace svga
