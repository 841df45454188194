#include "svga/objective.hpp"

#include <cmath>

namespace svga {

namespace {

// log(1 + exp(t)) without overflow.
inline real_t softplus(real_t t) {
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

inline real_t stable_sigmoid(real_t t) {
  if (t >= 0) return real_t(1) / (real_t(1) + std::exp(-t));
  const real_t e = std::exp(t);
  return e / (real_t(1) + e);
}

}  // namespace

real_t alpha_zero_ratio(const Mat& x, const std::vector<index_t>& mask) {
  if (mask.empty()) throw std::invalid_argument("alpha_zero_ratio: empty mask");
  index_t zeros = 0;
  for (const index_t i : mask) {
    zeros += (x.row(i).array() == real_t(0)).count();
  }
  return static_cast<real_t>(zeros) /
         (static_cast<real_t>(mask.size()) * static_cast<real_t>(x.cols()));
}

real_t loss_features(const Mat& xhat, const Mat& x, const std::vector<index_t>& mask,
                     FeatureKind kind, real_t alpha_ber, Mat* grad) {
  check_shape(xhat.rows() == x.rows() && xhat.cols() == x.cols(), "loss_features");
  if (mask.empty()) throw std::invalid_argument("loss_features: empty mask");
  if (kind == FeatureKind::binary && (alpha_ber <= 0 || alpha_ber >= 1)) {
    throw std::invalid_argument("alpha_ber must be in (0,1) for binary features");
  }
  if (grad) *grad = Mat::Zero(xhat.rows(), xhat.cols());

  real_t loss = 0;
  switch (kind) {
    case FeatureKind::continuous: {
      for (const index_t i : mask) {
        const auto diff = (xhat.row(i) - x.row(i)).eval();
        loss += diff.squaredNorm();
        if (grad) grad->row(i) = real_t(2) * diff;
      }
      break;
    }
    case FeatureKind::binary: {
      const real_t a = alpha_ber;
      for (const index_t i : mask) {
        for (index_t k = 0; k < x.cols(); ++k) {
          const real_t t = xhat(i, k);
          const real_t xi = x(i, k);
          // -[a x log s(t) + (1-a)(1-x) log(1-s(t))]
          loss += a * xi * softplus(-t) + (real_t(1) - a) * (real_t(1) - xi) * softplus(t);
          if (grad) {
            const real_t s = stable_sigmoid(t);
            (*grad)(i, k) =
                a * xi * (s - real_t(1)) + (real_t(1) - a) * (real_t(1) - xi) * s;
          }
        }
      }
      break;
    }
    case FeatureKind::categorical: {
      for (const index_t i : mask) {
        const real_t mx = xhat.row(i).maxCoeff();
        const auto shifted = (xhat.row(i).array() - mx).eval();
        const real_t lse = std::log(shifted.exp().sum());
        loss -= (x.row(i).array() * (shifted - lse)).sum();
        if (grad) {
          const real_t row_mass = x.row(i).sum();
          grad->row(i) =
              row_mass * (shifted - lse).exp().matrix() - x.row(i);
        }
      }
      break;
    }
  }
  return loss;
}

real_t loss_labels(const Mat& yhat, const std::vector<index_t>& labels,
                   const std::vector<index_t>& mask, Mat* grad) {
  if (grad) *grad = Mat::Zero(yhat.rows(), yhat.cols());
  if (mask.empty()) return 0;  // only the feature term remains without labels
  const index_t c = yhat.cols();
  real_t loss = 0;
  for (const index_t i : mask) {
    const index_t y = labels[i];
    if (y < 0 || y >= c) {
      throw DataError("label " + std::to_string(y) + " out of range [0," +
                      std::to_string(c) + ") at node " + std::to_string(i));
    }
    const real_t mx = yhat.row(i).maxCoeff();
    const auto shifted = (yhat.row(i).array() - mx).eval();
    const real_t lse = std::log(shifted.exp().sum());
    loss -= shifted[y] - lse;
    if (grad) {
      grad->row(i) = (shifted - lse).exp();
      (*grad)(i, y) -= real_t(1);
    }
  }
  return loss;
}

real_t loss_gmrf(const Mat& e, const GmrfPrior& prior, real_t alpha_logdet, real_t beta,
                 Mat* grad) {
  if (alpha_logdet <= 0) throw std::invalid_argument("alpha_logdet must be positive");
  const real_t trace_term = trace_quadratic(prior.k, e);
  const LogdetGramResult ld = logdet_gram(e, beta);
  if (grad) {
    *grad = trace_quadratic_backward(prior.k, e) - alpha_logdet * logdet_gram_backward(e, ld);
  }
  return trace_term - alpha_logdet * ld.value;
}

real_t kl_structured(const Mat& u, const Mat& v, const GmrfPrior& prior, real_t beta,
                     index_t d, Mat* grad_u, Mat* grad_v) {
  if (beta <= 0) throw std::invalid_argument("beta must be positive");
  const real_t n = static_cast<real_t>(prior.k.rows);
  const real_t dd = static_cast<real_t>(d);

  const real_t tr_uku = trace_quadratic(prior.k, u);
  const real_t tr_k = prior.k.trace();
  const real_t tr_vkv = trace_quadratic(prior.k, v);  // tr(K Sigma) - beta tr(K)
  const LogdetGramResult ld = logdet_gram(v, beta);
  const real_t log_det_sigma = ld.value + n * std::log(beta);

  if (grad_u) *grad_u = real_t(0.5) * trace_quadratic_backward(prior.k, u);
  if (grad_v) {
    *grad_v = real_t(0.5) * dd *
              (trace_quadratic_backward(prior.k, v) - logdet_gram_backward(v, ld));
  }
  return real_t(0.5) * (tr_uku + dd * (beta * tr_k + tr_vkv - log_det_sigma));
}

LossBreakdown total_objective(const ModelParams& params, const ForwardState& state,
                              const ObjectiveData& data, const TrainConfig& config,
                              const NormalizedAdjacency& a, ParamGrads* grads) {
  LossBreakdown out;
  const bool stochastic = config.variant == Variant::stoch;
  const bool want_reg = config.variant != Variant::noreg;

  Mat gx, gy;
  out.l_x = loss_features(state.xhat, *data.x, data.x_mask, data.kind, data.alpha_ber,
                          grads ? &gx : nullptr);
  const bool have_labels = data.labels && state.yhat.size() > 0 && !data.y_mask.empty();
  if (have_labels) {
    out.l_y = loss_labels(state.yhat, *data.labels, data.y_mask, grads ? &gy : nullptr);
  }

  real_t scale = 1;
  if (config.mean_reduction) {
    scale = real_t(1) / static_cast<real_t>(data.x_mask.size());
    out.l_x *= scale;
    out.l_y *= scale;
  }

  Mat grad_e, grad_u, grad_v;
  if (stochastic) {
    out.l_reg = kl_structured(state.u, state.v, *data.prior, config.beta, config.d,
                              grads ? &grad_u : nullptr, grads ? &grad_v : nullptr);
    out.total = out.l_x + out.l_y + out.l_reg;  // Algorithm 2: no lambda on the KL
  } else if (want_reg) {
    out.l_reg = loss_gmrf(state.enc.e, *data.prior, config.alpha_logdet, config.beta,
                          grads ? &grad_e : nullptr);
    out.total = out.l_x + out.l_y + config.lambda * out.l_reg;
  } else {
    out.l_reg = 0;
    out.total = out.l_x + out.l_y;
  }

  if (!grads) return out;
  *grads = zero_grads_like(params);

  // Decoder adjoints over the compacted masked rows, then the latent grad.
  Mat gbar_z = Mat::Zero(state.z.rows(), state.z.cols());
  {
    const index_t nm = static_cast<index_t>(data.x_mask.size());
    Mat gx_c(nm, gx.cols());
    Mat z_c(nm, state.z.cols());
    for (index_t k = 0; k < nm; ++k) {
      gx_c.row(k) = gx.row(data.x_mask[k]) * scale;
      z_c.row(k) = state.z.row(data.x_mask[k]);
    }
    grads->wx = gx_c.transpose() * z_c;
    grads->bx = colsum(gx_c);
    const Mat gz_c = gx_c * params.wx;
    for (index_t k = 0; k < nm; ++k) gbar_z.row(data.x_mask[k]) += gz_c.row(k);
  }
  if (have_labels) {
    const index_t nm = static_cast<index_t>(data.y_mask.size());
    Mat gy_c(nm, gy.cols());
    Mat z_c(nm, state.z.cols());
    for (index_t k = 0; k < nm; ++k) {
      gy_c.row(k) = gy.row(data.y_mask[k]) * scale;
      z_c.row(k) = state.z.row(data.y_mask[k]);
    }
    grads->wy = gy_c.transpose() * z_c;
    grads->by = colsum(gy_c);
    const Mat gz_c = gy_c * params.wy;
    for (index_t k = 0; k < nm; ++k) gbar_z.row(data.y_mask[k]) += gz_c.row(k);
  }

  if (stochastic) {
    // Z = U + sqrt(beta) M1 + V M2; M1 carries no parameter dependence.
    Mat gbar_u = gbar_z + grad_u;
    Mat gbar_v = gbar_z * state.m2.transpose() + grad_v;
    EncoderGrads mu = encoder_backward(state.enc, a, params.w2, gbar_u);
    grads->w1 = std::move(mu.w1);
    grads->b1 = std::move(mu.b1);
    grads->w2 = std::move(mu.w2);
    grads->b2 = std::move(mu.b2);
    Mat gbar_sigma_full = Mat::Zero(state.enc_sigma.e.rows(), state.enc_sigma.e.cols());
    gbar_sigma_full.leftCols(gbar_v.cols()) = gbar_v;
    EncoderGrads sg = encoder_backward(state.enc_sigma, a, params.w2s, gbar_sigma_full);
    grads->w1s = std::move(sg.w1);
    grads->b1s = std::move(sg.b1);
    grads->w2s = std::move(sg.w2);
    grads->b2s = std::move(sg.b2);
  } else {
    Mat gbar_e = gbar_z;
    if (want_reg && config.lambda != 0) gbar_e += config.lambda * grad_e;
    EncoderGrads enc = encoder_backward(state.enc, a, params.w2, gbar_e);
    grads->w1 = std::move(enc.w1);
    grads->b1 = std::move(enc.b1);
    grads->w2 = std::move(enc.w2);
    grads->b2 = std::move(enc.b2);
  }
  return out;
}

}  // namespace svga
