// Loss terms and their gradients: masked feature likelihoods, label
// cross-entropy, the deterministic GMRF regularizer, the structured KL of
// the stochastic variant, and total-objective assembly with the full
// reverse pass into parameter gradients.
#pragma once

#include "svga/data.hpp"
#include "svga/model.hpp"

#include <vector>

namespace svga {

struct LossBreakdown {
  real_t l_x = 0;
  real_t l_y = 0;
  real_t l_reg = 0;  // lambda-free regularizer value; the KL term when stochastic
  real_t total = 0;
};

// Fraction of zero entries among the observed (masked) feature rows — the
// class weight of the Bernoulli loss.
real_t alpha_zero_ratio(const Mat& x, const std::vector<index_t>& mask);

// Sum over masked nodes of the per-kind likelihood loss, sign-flipped to a
// quantity to minimize (>= 0 for the Gaussian and categorical kinds).
// `grad` (optional) receives d loss / d xhat, zero outside the mask.
real_t loss_features(const Mat& xhat, const Mat& x, const std::vector<index_t>& mask,
                     FeatureKind kind, real_t alpha_ber, Mat* grad = nullptr);

// Categorical cross-entropy over masked nodes; 0 when the mask is empty.
real_t loss_labels(const Mat& yhat, const std::vector<index_t>& labels,
                   const std::vector<index_t>& mask, Mat* grad = nullptr);

// tr(E^T K E) - alpha_logdet * log|I + beta^{-1} E^T E|.
real_t loss_gmrf(const Mat& e, const GmrfPrior& prior, real_t alpha_logdet, real_t beta,
                 Mat* grad = nullptr);

// Structured KL divergence of N(U, beta I + V V^T) from the GMRF prior,
// with the E-independent constant dropped:
//   0.5 ( tr(U^T K U) + d (beta tr(K) + tr(V^T K V)
//                          - log|I_r + beta^{-1} V^T V| - n log beta) ).
// Dropped constant, for oracles that want the exact KL against the jittered
// prior N(0, (K + jI)^{-1}): C = -0.5 * d * (n + log|K + jI|).
real_t kl_structured(const Mat& u, const Mat& v, const GmrfPrior& prior, real_t beta,
                     index_t d, Mat* grad_u = nullptr, Mat* grad_v = nullptr);

struct ObjectiveData {
  const Mat* x = nullptr;
  FeatureKind kind = FeatureKind::binary;
  std::vector<index_t> x_mask;               // nodes whose features enter the loss
  const std::vector<index_t>* labels = nullptr;  // nullptr when the run has no labels
  std::vector<index_t> y_mask;               // V_y
  const GmrfPrior* prior = nullptr;
  real_t alpha_ber = 0.5;
};

// Forward-state losses plus the complete reverse pass. `grads` may be null
// for evaluation-only calls. noreg skips the regularizer entirely and
// reports l_reg = 0; det with lambda = 0 produces the same total and
// gradients (the PRNG draw order is identical by construction).
LossBreakdown total_objective(const ModelParams& params, const ForwardState& state,
                              const ObjectiveData& data, const TrainConfig& config,
                              const NormalizedAdjacency& a, ParamGrads* grads = nullptr);

}  // namespace svga
