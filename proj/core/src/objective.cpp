#include "snnlab/objective.hpp"

#include <cmath>
#include <string>

#include "snnlab/error.hpp"

namespace snnlab {

CompositeLossConfig CompositeLossConfig::for_spec(const MlpSpec& spec, double alpha,
                                                  std::size_t cosine_above) {
  spec.validate();
  CompositeLossConfig config;
  config.alpha = alpha;
  for (std::size_t h = 0; h < spec.hidden_count(); ++h) {
    config.layers.push_back(h);
    config.metrics.push_back(spec.widths[h + 1] > cosine_above ? Metric::cosine
                                                               : Metric::euclidean);
  }
  return config;
}

void CompositeLossConfig::validate(const MlpSpec& spec) const {
  if (!std::isfinite(alpha)) throw Error(ErrorCode::invalid_input, "alpha must be finite");
  if (metrics.size() != layers.size()) {
    throw Error(ErrorCode::invalid_input, "one metric per regularized layer is required");
  }
  for (std::size_t layer : layers) {
    if (layer >= spec.hidden_count()) {
      throw Error(ErrorCode::invalid_input,
                  "layer " + std::to_string(layer) + " is not a hidden layer");
    }
  }
  Temperature::from_value(initial_temperature);
  if (!(temperature_step > 0.0)) {
    throw Error(ErrorCode::invalid_input, "temperature_step must be positive");
  }
}

std::vector<TemperatureState> CompositeLossConfig::initial_temperatures() const {
  return std::vector<TemperatureState>(
      layers.size(), TemperatureState{Temperature::from_value(initial_temperature), temperature_step});
}

namespace {

struct LayerTerm {
  DistanceMatrix distances;
  SnnGradient grad;
};

void check_temperatures(const CompositeLossConfig& config, std::size_t count) {
  if (count != config.layers.size()) {
    throw Error(ErrorCode::invalid_input, "one temperature state per regularized layer is required");
  }
}

template <typename Fn>
auto for_layer(std::size_t layer, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.with_layer(layer);
  }
}

// Shared evaluation; gradients of each SNN term wrt its activations are
// returned when requested.
CompositeLoss evaluate(const ForwardTrace& trace, std::span<const int> labels,
                       const CompositeLossConfig& config,
                       std::span<const TemperatureState> temperatures,
                       std::vector<LayerTerm>* terms) {
  check_temperatures(config, temperatures.size());
  CompositeLoss loss;
  loss.cross_entropy = cross_entropy(trace.logits(), labels);
  loss.total = loss.cross_entropy;
  if (config.alpha == 0.0) return loss;

  double snn_sum = 0.0;
  for (std::size_t s = 0; s < config.layers.size(); ++s) {
    const std::size_t layer = config.layers[s];
    const Matrix& act = trace.activations.at(layer);
    const Temperature t = temperatures[s].temperature;
    LayerTerm term = for_layer(layer, [&] {
      DistanceMatrix d = pairwise_distance(act, config.metrics[s]);
      SnnGradient g = snn_loss_grad(act, labels, d, t, config.metrics[s]);
      return LayerTerm{std::move(d), std::move(g)};
    });
    loss.snn.push_back(term.grad.result.loss);
    loss.temperatures.push_back(t.value());
    snn_sum += term.grad.result.loss;
    if (terms) terms->push_back(std::move(term));
  }
  loss.total = loss.cross_entropy + config.alpha * snn_sum;
  return loss;
}

Gradients gradients_from(const Params& params, const ForwardTrace& trace,
                         std::span<const int> labels, const CompositeLossConfig& config,
                         const std::vector<LayerTerm>& terms) {
  std::vector<Matrix> activation_grads(params.spec.hidden_count());
  for (std::size_t s = 0; s < terms.size(); ++s) {
    Matrix& slot = activation_grads[config.layers[s]];
    if (slot.empty()) slot = Matrix(terms[s].grad.points.rows(), terms[s].grad.points.cols());
    slot.eigen() += config.alpha * terms[s].grad.points.eigen();
  }
  const Matrix logit_grad = cross_entropy_logit_grad(trace.probabilities, labels);
  return backpropagate(params, trace, logit_grad, activation_grads, true, false).params;
}

}  // namespace

CompositeLoss evaluate_composite(const ForwardTrace& trace, std::span<const int> labels,
                                 const CompositeLossConfig& config,
                                 std::span<const TemperatureState> temperatures) {
  return evaluate(trace, labels, config, temperatures, nullptr);
}

CompositeLoss composite_loss(const ForwardTrace& trace, std::span<const int> labels,
                             const CompositeLossConfig& config,
                             std::span<TemperatureState> temperatures) {
  check_temperatures(config, temperatures.size());
  if (config.alpha == 0.0) return evaluate(trace, labels, config, temperatures, nullptr);
  std::vector<LayerTerm> terms;
  CompositeLoss loss = evaluate(trace, labels, config, temperatures, &terms);
  for (std::size_t s = 0; s < terms.size(); ++s) {
    descend_temperature(terms[s].distances, labels, temperatures[s], terms[s].grad);
  }
  return loss;
}

Gradients backward(const Params& params, const ForwardTrace& trace, std::span<const int> labels,
                   const CompositeLossConfig& config,
                   std::span<const TemperatureState> temperatures) {
  std::vector<LayerTerm> terms;
  evaluate(trace, labels, config, temperatures, &terms);
  return gradients_from(params, trace, labels, config, terms);
}

CompositeStep composite_step(const Params& params, const ForwardTrace& trace,
                             std::span<const int> labels, const CompositeLossConfig& config,
                             std::span<TemperatureState> temperatures) {
  std::vector<LayerTerm> terms;
  CompositeStep step;
  step.loss = evaluate(trace, labels, config, temperatures, &terms);
  step.gradients = gradients_from(params, trace, labels, config, terms);
  for (std::size_t s = 0; s < terms.size(); ++s) {
    descend_temperature(terms[s].distances, labels, temperatures[s], terms[s].grad);
  }
  return step;
}

}  // namespace snnlab
