// Adam over an arbitrary list of parameter tensors.
#pragma once

#include "svga/types.hpp"

#include <vector>

namespace svga {

struct ConstTensorView {
  const real_t* data = nullptr;
  index_t size = 0;
};

struct TensorView {
  real_t* data = nullptr;
  index_t size = 0;
  operator ConstTensorView() const { return {data, size}; }
};

inline TensorView view(Mat& m) { return {m.data(), m.size()}; }
inline TensorView view(Vec& v) { return {v.data(), v.size()}; }
inline ConstTensorView view(const Mat& m) { return {m.data(), m.size()}; }
inline ConstTensorView view(const Vec& v) { return {v.data(), v.size()}; }

struct AdamState {
  real_t beta1 = 0.9;
  real_t beta2 = 0.999;
  real_t eps = 1e-8;
  long step = 0;
  std::vector<std::vector<real_t>> m;  // first moments, one buffer per tensor
  std::vector<std::vector<real_t>> v;  // second moments

  void init(const std::vector<TensorView>& params) {
    m.clear();
    v.clear();
    for (const auto& p : params) {
      m.emplace_back(p.size, real_t(0));
      v.emplace_back(p.size, real_t(0));
    }
    step = 0;
  }
};

// Standard bias-corrected Adam update, in place.
void adam_step(const std::vector<TensorView>& params,
               const std::vector<ConstTensorView>& grads, AdamState& state, real_t lr);

}  // namespace svga
