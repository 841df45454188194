// Run configuration shared by the model, objective, and trainer.
#pragma once

#include "svga/types.hpp"

#include <cstdint>
#include <string>

namespace svga {

enum class Variant { det, stoch, noreg };

enum class ValMetric {
  auto_select,  // recall@k for binary features, negative RMSE for continuous
  recall,
  neg_rmse,
};

struct TrainConfig {
  index_t d = 256;
  real_t dropout = 0.5;
  real_t lambda = 1.0;
  real_t beta = 1.0;
  real_t alpha_logdet = 0.5;
  real_t lr = 0.001;
  int max_epochs = 2000;
  int patience = 100;
  Variant variant = Variant::det;
  bool unit_norm = true;
  index_t r = 0;  // low-rank size of the covariance factor; 0 means r = d
  std::uint64_t seed = 0;
  ValMetric val_metric = ValMetric::auto_select;
  int val_k = 10;
  bool mean_reduction = false;  // sum over nodes by default, matching the losses

  index_t rank() const { return r > 0 ? r : d; }
};

Variant variant_from_string(const std::string& s);
std::string to_string(Variant v);

}  // namespace svga
