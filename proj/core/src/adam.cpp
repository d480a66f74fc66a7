#include "snnlab/adam.hpp"

#include <cmath>
#include <span>
#include <string>

#include "snnlab/error.hpp"

namespace snnlab {

AdamState::AdamState(const MlpSpec& spec, AdamConfig cfg)
    : config(cfg), first_moment(zero_gradients(spec)), second_moment(zero_gradients(spec)) {}

namespace {

void update(std::span<double> param, std::span<const double> grad, std::span<double> m,
            std::span<double> v, const AdamConfig& c, double correction1, double correction2) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grad[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    param[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

}  // namespace

void adam_step(AdamState& state, Params& params, const Gradients& grads) {
  if (grads.size() != params.layers.size() || state.first_moment.size() != params.layers.size()) {
    throw Error(ErrorCode::invalid_input, "gradient layout does not match parameters");
  }
  ++state.step;
  const auto t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.config.beta1, t);
  const double correction2 = 1.0 - std::pow(state.config.beta2, t);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    DenseLayer& layer = params.layers[l];
    if (grads[l].weights.size() != layer.weights.size() || grads[l].bias.size() != layer.bias.size()) {
      throw Error(ErrorCode::invalid_input, "gradient shape mismatch at layer " + std::to_string(l));
    }
    update(layer.weights.values(), grads[l].weights.values(), state.first_moment[l].weights.values(),
           state.second_moment[l].weights.values(), state.config, correction1, correction2);
    update(layer.bias, grads[l].bias, state.first_moment[l].bias, state.second_moment[l].bias,
           state.config, correction1, correction2);
  }
}

}  // namespace snnlab
