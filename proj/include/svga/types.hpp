// Shared numeric aliases and error types.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace svga {

#ifdef SVGA_REAL32
using real_t = float;
#else
using real_t = double;
#endif

// Row-major throughout: checkpoints and the python buffer protocol both
// expect C order, and the sparse-dense kernels walk rows.
using Mat = Eigen::Matrix<real_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::Matrix<real_t, Eigen::Dynamic, 1>;

using index_t = std::int64_t;

// Malformed or inconsistent input data (CLI exit code 3).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values or a failed factorization mid-run (CLI exit code 4).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void check_shape(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("shape mismatch: " + what);
}

}  // namespace svga
