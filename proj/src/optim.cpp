#include "svga/optim.hpp"

#include <cmath>

namespace svga {

void adam_step(const std::vector<TensorView>& params,
               const std::vector<ConstTensorView>& grads, AdamState& state, real_t lr) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw std::invalid_argument("adam_step: tensor list mismatch");
  }
  ++state.step;
  const real_t bc1 = real_t(1) - std::pow(state.beta1, static_cast<real_t>(state.step));
  const real_t bc2 = real_t(1) - std::pow(state.beta2, static_cast<real_t>(state.step));
  for (std::size_t t = 0; t < params.size(); ++t) {
    check_shape(params[t].size == grads[t].size &&
                    params[t].size == static_cast<index_t>(state.m[t].size()),
                "adam_step tensor " + std::to_string(t));
    real_t* p = params[t].data;
    const real_t* g = grads[t].data;
    real_t* m = state.m[t].data();
    real_t* v = state.v[t].data();
    for (index_t i = 0; i < params[t].size; ++i) {
      m[i] = state.beta1 * m[i] + (real_t(1) - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (real_t(1) - state.beta2) * g[i] * g[i];
      const real_t mhat = m[i] / bc1;
      const real_t vhat = v[i] / bc2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace svga
