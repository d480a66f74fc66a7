#pragma once

#include <cstddef>

#include "snnlab/mlp.hpp"

namespace snnlab {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  Gradients first_moment;
  Gradients second_moment;
  std::size_t step = 0;

  AdamState(const MlpSpec& spec, AdamConfig config);
};

/// Bias-corrected Adam update of every weight and bias.
void adam_step(AdamState& state, Params& params, const Gradients& grads);

}  // namespace snnlab
