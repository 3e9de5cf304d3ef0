#pragma once

#include <cstdint>

#include "lgp/numerics.hpp"

namespace lgp {

struct AdamWConfig {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct AdamWState {
  std::uint64_t step = 0;
  ParamMap first_moment;
  ParamMap second_moment;
};

// One decoupled-weight-decay Adam step over every parameter in `params`:
//   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * theta
// Parameters missing from `grads` are treated as having a zero gradient.
// Throws ShapeError for a gradient of unknown name or mismatched length.
void adamw_step(const AdamWConfig& cfg, ParamMap& params, const ParamMap& grads, AdamWState& state);

}  // namespace lgp
