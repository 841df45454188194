#include "svga/kernels.hpp"

#include <cmath>
#include <string>

namespace svga {

#ifndef NDEBUG
void debug_check_finite(const Mat& m, const char* where) {
  if (!m.allFinite()) {
    throw NumericalError(std::string("non-finite values after kernel: ") + where);
  }
}
#endif

Mat spmm(const CsrMatrix& s, const Mat& b) {
  check_shape(s.cols == b.rows(), "spmm");
  Mat out = Mat::Zero(s.rows, b.cols());
  for (index_t i = 0; i < s.rows; ++i) {
    auto row = out.row(i);
    for (index_t p = s.indptr[i]; p < s.indptr[i + 1]; ++p) {
      row += s.values[p] * b.row(s.indices[p]);
    }
  }
  debug_check_finite(out, "spmm");
  return out;
}

Mat spmm_transposed(const CsrMatrix& s, const Mat& b) {
  check_shape(s.rows == b.rows(), "spmm_transposed");
  Mat out = Mat::Zero(s.cols, b.cols());
  for (index_t i = 0; i < s.rows; ++i) {
    for (index_t p = s.indptr[i]; p < s.indptr[i + 1]; ++p) {
      out.row(s.indices[p]) += s.values[p] * b.row(i);
    }
  }
  debug_check_finite(out, "spmm_transposed");
  return out;
}

Mat relu(const Mat& x) { return x.cwiseMax(real_t(0)); }

Mat relu_backward(const Mat& gbar, const Mat& activated) {
  check_shape(gbar.rows() == activated.rows() && gbar.cols() == activated.cols(),
              "relu_backward");
  return (activated.array() > real_t(0)).select(gbar, Mat::Zero(gbar.rows(), gbar.cols()));
}

DropoutResult dropout(const Mat& x, real_t p, bool training, Rng& rng) {
  if (p < 0 || p >= 1) throw std::invalid_argument("dropout p must be in [0, 1)");
  DropoutResult r;
  if (!training || p == 0) {
    r.out = x;
    return r;
  }
  const real_t keep_scale = real_t(1) / (real_t(1) - p);
  r.scale.resize(x.rows(), x.cols());
  for (index_t i = 0; i < x.rows(); ++i) {
    for (index_t j = 0; j < x.cols(); ++j) {
      r.scale(i, j) = rng.uniform() < p ? real_t(0) : keep_scale;
    }
  }
  r.out = x.cwiseProduct(r.scale);
  return r;
}

Mat dropout_backward(const Mat& gbar, const DropoutResult& fwd) {
  if (fwd.scale.size() == 0) return gbar;
  return gbar.cwiseProduct(fwd.scale);
}

namespace {
constexpr real_t kNormEps = real_t(1e-12);
}

RowNormResult row_unit_normalize(const Mat& x) {
  RowNormResult r;
  r.out.resize(x.rows(), x.cols());
  r.inv_norm.resize(x.rows());
  for (index_t i = 0; i < x.rows(); ++i) {
    const real_t norm = x.row(i).norm();
    r.inv_norm[i] = real_t(1) / std::max(norm, kNormEps);
    r.out.row(i) = x.row(i) * r.inv_norm[i];
  }
  debug_check_finite(r.out, "row_unit_normalize");
  return r;
}

Mat row_unit_normalize_backward(const Mat& gbar, const RowNormResult& fwd) {
  check_shape(gbar.rows() == fwd.out.rows() && gbar.cols() == fwd.out.cols(),
              "row_unit_normalize_backward");
  Mat out(gbar.rows(), gbar.cols());
  for (index_t i = 0; i < gbar.rows(); ++i) {
    const auto zhat = fwd.out.row(i);
    const real_t dot = zhat.dot(gbar.row(i));
    out.row(i) = (gbar.row(i) - dot * zhat) * fwd.inv_norm[i];
  }
  return out;
}

Mat sigmoid(const Mat& x) {
  Mat out(x.rows(), x.cols());
  for (index_t i = 0; i < x.rows(); ++i) {
    for (index_t j = 0; j < x.cols(); ++j) {
      const real_t t = x(i, j);
      if (t >= 0) {
        out(i, j) = real_t(1) / (real_t(1) + std::exp(-t));
      } else {
        const real_t e = std::exp(t);
        out(i, j) = e / (real_t(1) + e);
      }
    }
  }
  return out;
}

Mat log_softmax_rows(const Mat& x) {
  Mat out(x.rows(), x.cols());
  for (index_t i = 0; i < x.rows(); ++i) {
    const real_t mx = x.row(i).maxCoeff();
    const real_t lse = std::log((x.row(i).array() - mx).exp().sum());
    out.row(i) = x.row(i).array() - mx - lse;
  }
  debug_check_finite(out, "log_softmax_rows");
  return out;
}

real_t trace_quadratic(const CsrMatrix& k, const Mat& e) {
  check_shape(k.cols == e.rows() && k.rows == k.cols, "trace_quadratic");
  real_t acc = 0;
  for (index_t i = 0; i < k.rows; ++i) {
    for (index_t p = k.indptr[i]; p < k.indptr[i + 1]; ++p) {
      acc += k.values[p] * e.row(i).dot(e.row(k.indices[p]));
    }
  }
  return acc;
}

Mat trace_quadratic_backward(const CsrMatrix& k, const Mat& e, real_t gbar) {
  Mat g = spmm(k, e);
  g *= real_t(2) * gbar;
  return g;
}

CholeskyResult cholesky(const Mat& m) {
  check_shape(m.rows() == m.cols(), "cholesky");
  CholeskyResult r;
  r.llt.compute(m);
  if (r.llt.info() == Eigen::Success) return r;
  for (real_t jitter = real_t(1e-10); jitter <= real_t(1e-4); jitter *= 10) {
    Mat jittered = m;
    jittered.diagonal().array() += jitter;
    r.llt.compute(jittered);
    if (r.llt.info() == Eigen::Success) {
      r.jitter = jitter;
      return r;
    }
  }
  throw NumericalError("Cholesky failed after jitter escalation to 1e-4");
}

Mat cholesky_factor(const Mat& m) { return cholesky(m).llt.matrixL(); }

LogdetGramResult logdet_gram(const Mat& e, real_t beta) {
  if (beta <= 0) throw std::invalid_argument("beta must be positive");
  Mat gram = (e.transpose() * e) / beta;
  gram.diagonal().array() += real_t(1);
  LogdetGramResult r;
  r.factor = cholesky(gram);
  r.beta = beta;
  r.value = real_t(2) * Mat(r.factor.llt.matrixL()).diagonal().array().log().sum();
  return r;
}

Mat logdet_gram_backward(const Mat& e, const LogdetGramResult& fwd, real_t gbar) {
  // d/dE log|I + b^-1 E^T E| = 2 b^-1 E (I + b^-1 E^T E)^-1
  Mat minv_et = fwd.factor.llt.solve(Mat(e.transpose()));
  return (real_t(2) * gbar / fwd.beta) * minv_et.transpose();
}

Vec colsum(const Mat& g) { return g.colwise().sum().transpose(); }

}  // namespace svga
