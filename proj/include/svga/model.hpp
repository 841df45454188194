// The SVGA network: a two-layer GCN encoder fed the (virtual) identity
// matrix, linear decoders for features and labels, and the hand-composed
// reverse pass over that fixed graph. The stochastic variant adds a second
// encoder head that parameterizes the low-rank covariance factor.
#pragma once

#include "svga/config.hpp"
#include "svga/graph.hpp"
#include "svga/kernels.hpp"
#include "svga/rng.hpp"

#include <string>

namespace svga {

struct ModelParams {
  Mat w1;  // n x d, the free per-node embeddings of the identity-input layer
  Vec b1;
  Mat w2;  // d x d
  Vec b2;
  Mat wx;  // m x d
  Vec bx;
  Mat wy;  // c x d; c may be 0 when no labels exist
  Vec by;
  Mat w1s;  // sigma head, stochastic variant only (empty otherwise)
  Vec b1s;
  Mat w2s;
  Vec b2s;

  bool has_sigma_head() const { return w1s.size() > 0; }
  bool all_finite() const;
};

// Gradients share the parameter layout.
using ParamGrads = ModelParams;

ParamGrads zero_grads_like(const ModelParams& p);

// Glorot-uniform weights, zero biases, bit-reproducible per seed.
ModelParams init_params(index_t n, index_t d, index_t m, index_t c, Variant variant,
                        std::uint64_t seed);

// One encoder head's forward activations, kept for the reverse pass.
struct EncoderCache {
  Mat h1;       // relu(A W1 + b1)
  DropoutResult drop;
  Mat h2pre;    // A * dropout(h1), the input of the W2 product
  RowNormResult norm;  // set only when unit normalization is on
  Mat e;        // final output
  bool normalized = false;
};

struct EncoderGrads {
  Mat w1;
  Vec b1;
  Mat w2;
  Vec b2;
};

struct ForwardState {
  EncoderCache enc;        // deterministic encoder, or the mu head
  EncoderCache enc_sigma;  // stochastic variant only
  Mat u;  // n x d mean embeddings (stochastic)
  Mat v;  // n x r covariance factor (stochastic)
  Mat m2; // r x d sample kept for the reverse pass (stochastic)
  Mat z;  // latents fed to the decoders; equals enc.e in the deterministic variant
  Mat xhat;  // n x m logits / raw predictions
  Mat yhat;  // n x c logits, empty when the model has no label decoder
};

// E = unitnorm(A * dropout(relu(A W1 + b1)) * W2 + b2); the identity input
// is never materialized. `rng` is consumed only when training && dropout > 0.
EncoderCache encode(const ModelParams& params, const NormalizedAdjacency& a,
                    const TrainConfig& config, bool training, Rng& rng);

// Stochastic encoder: U from the mu head (normalized iff unit_norm), V from
// the first rank() columns of the sigma head, Z = U + sqrt(beta) M1 + V M2
// with fresh standard-normal M1, M2 from `sample_rng`.
ForwardState encode_stochastic(const ModelParams& params, const NormalizedAdjacency& a,
                               const TrainConfig& config, bool training, Rng& dropout_rng,
                               Rng& sample_rng);

// Raw affine logits; the loss functions own the squashing.
Mat decode_features(const ModelParams& params, const Mat& z);
Mat decode_labels(const ModelParams& params, const Mat& z);

// Full forward for either variant.
ForwardState forward(const ModelParams& params, const NormalizedAdjacency& a,
                     const TrainConfig& config, bool training, Rng& dropout_rng,
                     Rng& sample_rng);

// Reverse pass of one encoder head given the gradient at its output.
EncoderGrads encoder_backward(const EncoderCache& cache, const NormalizedAdjacency& a,
                              const Mat& w2, const Mat& gbar_e);

// Checkpoint container: magic "SVGA1", then per tensor u32 name length,
// name bytes, u64 rows, u64 cols, row-major float64 little-endian values.
// Tensor order: W1,b1,W2,b2,Wx,bx,Wy,by[,W1s,b1s,W2s,b2s].
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace svga
