#include "snnlab/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "snnlab/error.hpp"

namespace snnlab {

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::invalid_input, "epsilon must be non-negative");
  }
  if (!(step_size > 0.0)) throw Error(ErrorCode::invalid_input, "step_size must be positive");
  if (steps < 1) throw Error(ErrorCode::invalid_input, "steps must be at least 1");
  if (!(clip_min < clip_max)) throw Error(ErrorCode::invalid_input, "clip range is empty");
}

Matrix input_gradient(const Params& params, const Matrix& x, std::span<const int> labels) {
  if (labels.size() != x.rows()) {
    throw Error(ErrorCode::invalid_input, "label count does not match input rows");
  }
  const ForwardTrace trace = forward(params, x);
  // The mean cross-entropy gradient scaled back by the row count gives each
  // row the gradient of its own loss.
  Matrix logit_grad = cross_entropy_logit_grad(trace.probabilities, labels);
  logit_grad.eigen() *= static_cast<double>(x.rows());
  return backpropagate(params, trace, logit_grad, {}, false, true).input;
}

namespace {

std::vector<int> attack_labels(std::span<const int> labels, const AttackConfig& config) {
  if (config.target) return std::vector<int>(labels.size(), *config.target);
  return {labels.begin(), labels.end()};
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Ascend the true-label loss, or descend the target-class loss.
double direction(const AttackConfig& config) { return config.target ? -1.0 : 1.0; }

}  // namespace

Matrix fgsm(const Params& params, const Matrix& x, std::span<const int> labels,
            const AttackConfig& config) {
  config.validate();
  const std::vector<int> y = attack_labels(labels, config);
  const Matrix grad = input_gradient(params, x, y);
  const double dir = direction(config);
  Matrix out = x;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double moved = x.values()[i] + dir * config.epsilon * sign(grad.values()[i]);
    out.values()[i] = std::clamp(moved, config.clip_min, config.clip_max);
  }
  return out;
}

Matrix bim(const Params& params, const Matrix& x, std::span<const int> labels,
           const AttackConfig& config, const IterateObserver& observer) {
  config.validate();
  const std::vector<int> y = attack_labels(labels, config);
  const double dir = direction(config);
  Matrix current = x;
  for (std::size_t step = 0; step < config.steps; ++step) {
    const Matrix grad = input_gradient(params, current, y);
    for (std::size_t i = 0; i < current.size(); ++i) {
      const double origin = x.values()[i];
      const double lo = std::max(config.clip_min, origin - config.epsilon);
      const double hi = std::min(config.clip_max, origin + config.epsilon);
      const double moved = current.values()[i] + dir * config.step_size * sign(grad.values()[i]);
      current.values()[i] = std::clamp(moved, lo, hi);
    }
    if (observer) observer(step + 1, current);
  }
  return current;
}

}  // namespace snnlab
