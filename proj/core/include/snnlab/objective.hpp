#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "snnlab/mlp.hpp"
#include "snnlab/snn_loss.hpp"

namespace snnlab {

/// Cross-entropy on the logits plus alpha times the temperature-optimized
/// soft nearest neighbor loss of selected hidden layers. Negative alpha
/// rewards entangled hidden representations.
struct CompositeLossConfig {
  double alpha = 0.0;
  /// Hidden layer indices (0 = first hidden layer). The logit layer is never included.
  std::vector<std::size_t> layers;
  /// One metric per entry of `layers`.
  std::vector<Metric> metrics;
  double initial_temperature = 100.0;
  double temperature_step = 0.1;

  /// Every hidden layer; cosine distance for layers wider than `cosine_above`.
  static CompositeLossConfig for_spec(const MlpSpec& spec, double alpha,
                                      std::size_t cosine_above = 512);

  void validate(const MlpSpec& spec) const;
  std::vector<TemperatureState> initial_temperatures() const;
};

struct CompositeLoss {
  double total = 0.0;
  double cross_entropy = 0.0;
  std::vector<double> snn;           ///< per selected layer
  std::vector<double> temperatures;  ///< temperature each term was evaluated at
};

/// Pure evaluation at the given temperatures.
CompositeLoss evaluate_composite(const ForwardTrace& trace, std::span<const int> labels,
                                 const CompositeLossConfig& config,
                                 std::span<const TemperatureState> temperatures);

/// Evaluates at the current temperatures, then moves each layer's
/// temperature one descent step.
CompositeLoss composite_loss(const ForwardTrace& trace, std::span<const int> labels,
                             const CompositeLossConfig& config,
                             std::span<TemperatureState> temperatures);

/// Exact gradient of the composite objective wrt every weight and bias,
/// holding the temperatures fixed.
Gradients backward(const Params& params, const ForwardTrace& trace, std::span<const int> labels,
                   const CompositeLossConfig& config,
                   std::span<const TemperatureState> temperatures);

struct CompositeStep {
  CompositeLoss loss;
  Gradients gradients;
};

/// One training evaluation: loss and parameter gradients at the current
/// temperatures, then one temperature descent step per layer.
CompositeStep composite_step(const Params& params, const ForwardTrace& trace,
                             std::span<const int> labels, const CompositeLossConfig& config,
                             std::span<TemperatureState> temperatures);

}  // namespace snnlab
