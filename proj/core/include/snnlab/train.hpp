#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "snnlab/adam.hpp"
#include "snnlab/dataio.hpp"
#include "snnlab/mlp.hpp"
#include "snnlab/objective.hpp"

namespace snnlab {

enum class MeasureMode { fixed, optimized };

struct MeasureConfig {
  MeasureMode mode = MeasureMode::fixed;
  /// Fixed temperature, or the starting point of the optimized mode.
  double temperature = 100.0;
  std::size_t steps = 25;
  double step_size = 0.1;
  /// Per measured layer (hidden layers, then logits). Empty selects
  /// euclidean, or cosine for layers wider than `cosine_above`.
  std::vector<Metric> metrics;
  std::size_t cosine_above = 512;
};

struct LayerEntanglement {
  double entanglement = 0.0;
  double temperature = 0.0;
  Metric metric = Metric::euclidean;
};

/// Soft nearest neighbor loss of every hidden layer and of the logits.
std::vector<LayerEntanglement> measure_layer_entanglement(const Params& params,
                                                          const LabeledBatch& batch,
                                                          const MeasureConfig& config);

struct TrainSchedule {
  std::size_t steps = 5000;
  std::size_t batch_size = 256;
  /// Metrics are logged at step 0, every eval_interval steps and at the end.
  std::size_t eval_interval = 500;
  std::uint64_t seed = 0;
  AdamConfig adam;
  /// Entanglement is measured on the first measure_batch training points.
  std::size_t measure_batch = 128;
  MeasureConfig measure;
};

struct MetricsRow {
  std::size_t step = 0;
  double train_ce = 0.0;
  double test_ce = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  std::vector<double> entanglement;  ///< per measured layer
  std::vector<double> temperature;   ///< per measured layer

  bool operator==(const MetricsRow&) const = default;
};

struct MetricsLog {
  std::size_t layer_count = 0;
  std::vector<MetricsRow> rows;

  /// step, train_ce, test_ce, train_acc, test_acc, ent_layer_i..., temp_layer_i...
  std::vector<std::string> header() const;
  bool operator==(const MetricsLog&) const = default;
};

struct TrainResult {
  Params params;
  MetricsLog log;
  std::vector<TemperatureState> temperatures;
};

/// Seeded mini-batch Adam on the composite objective. Batches come from
/// reshuffled passes over the training split; a trailing partial batch is
/// dropped. Test metrics are NaN when the dataset has no test split.
TrainResult train(const Dataset& dataset, const MlpSpec& spec, const CompositeLossConfig& objective,
                  const TrainSchedule& schedule);

struct SplitMetrics {
  double cross_entropy = 0.0;
  double accuracy = 0.0;
};

/// Cross-entropy and accuracy over a whole split, evaluated in chunks.
SplitMetrics evaluate_split(const Params& params, const LabeledBatch& batch);

}  // namespace snnlab
