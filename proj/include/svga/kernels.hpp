// Numeric kernels with analytic adjoints. The network is a fixed graph, so
// reverse mode is composed by hand from these forward/backward pairs; each
// *Result struct carries the closure data its backward needs.
#pragma once

#include "svga/csr.hpp"
#include "svga/rng.hpp"
#include "svga/types.hpp"

#include <Eigen/Cholesky>

namespace svga {

#ifndef NDEBUG
void debug_check_finite(const Mat& m, const char* where);
#else
inline void debug_check_finite(const Mat&, const char*) {}
#endif

// --- sparse-dense products ------------------------------------------------

// S * B. Adjoint wrt B is S^T * gbar (spmm_transposed).
Mat spmm(const CsrMatrix& s, const Mat& b);

// S^T * B via deterministic sequential scatter.
Mat spmm_transposed(const CsrMatrix& s, const Mat& b);

// --- elementwise / row ops ------------------------------------------------

Mat relu(const Mat& x);
// gbar masked by activation sign; `activated` is the forward output.
Mat relu_backward(const Mat& gbar, const Mat& activated);

struct DropoutResult {
  Mat out;
  Mat scale;  // 0 or 1/(1-p) per entry; empty when dropout was a no-op
};
// Inverted dropout, active only in training mode. Requires 0 <= p < 1.
DropoutResult dropout(const Mat& x, real_t p, bool training, Rng& rng);
Mat dropout_backward(const Mat& gbar, const DropoutResult& fwd);

struct RowNormResult {
  Mat out;
  Vec inv_norm;  // 1 / max(||row||, eps)
};
// Maps each row z to z / max(||z||_2, 1e-12).
RowNormResult row_unit_normalize(const Mat& x);
// Jacobian per row: (I - zhat zhat^T) / max(||z||, eps).
Mat row_unit_normalize_backward(const Mat& gbar, const RowNormResult& fwd);

Mat sigmoid(const Mat& x);
Mat log_softmax_rows(const Mat& x);

// --- regularizer kernels ---------------------------------------------------

// sum_ij K_ij <e_i, e_j> over the sparse pattern only. K must be symmetric.
// Adjoint wrt E: 2 K E.
real_t trace_quadratic(const CsrMatrix& k, const Mat& e);
Mat trace_quadratic_backward(const CsrMatrix& k, const Mat& e, real_t gbar = 1);

// Lower Cholesky factor of M (+ jitter*I under the escalation policy:
// plain attempt first, then 1e-10 escalating x10 up to 1e-4). Throws
// NumericalError when every attempt fails.
struct CholeskyResult {
  Eigen::LLT<Mat> llt;
  real_t jitter = 0;  // jitter actually applied
};
CholeskyResult cholesky(const Mat& m);
Mat cholesky_factor(const Mat& m);  // convenience: the L matrix itself

// log|I_d + beta^{-1} E^T E| through the d x d Gram matrix.
// Adjoint wrt E: 2 beta^{-1} E (I + beta^{-1} E^T E)^{-1}.
struct LogdetGramResult {
  real_t value = 0;
  CholeskyResult factor;  // of I + beta^{-1} E^T E (jittered if needed)
  real_t beta = 1;
};
LogdetGramResult logdet_gram(const Mat& e, real_t beta);
Mat logdet_gram_backward(const Mat& e, const LogdetGramResult& fwd, real_t gbar = 1);

// Column sums, the bias adjoint for X + 1 b^T layers.
Vec colsum(const Mat& g);

}  // namespace svga
