#include "snnlab/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "snnlab/error.hpp"

namespace snnlab {

std::vector<LayerEntanglement> measure_layer_entanglement(const Params& params,
                                                          const LabeledBatch& batch,
                                                          const MeasureConfig& config) {
  const ForwardTrace trace = forward(params, batch.points());
  const std::size_t layers = trace.layer_count();
  if (!config.metrics.empty() && config.metrics.size() != layers) {
    throw Error(ErrorCode::invalid_input, "one metric per measured layer is required");
  }
  std::vector<LayerEntanglement> out;
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& act = trace.activations[l];
    const Metric metric = !config.metrics.empty()   ? config.metrics[l]
                          : act.cols() > config.cosine_above ? Metric::cosine
                                                             : Metric::euclidean;
    try {
      const DistanceMatrix distances = pairwise_distance(act, metric);
      const Temperature start = Temperature::from_value(config.temperature);
      if (config.mode == MeasureMode::fixed) {
        out.push_back({snn_loss(distances, batch.labels(), start).loss, start.value(), metric});
      } else {
        const OptimizedSnn best =
            optimized_snn_loss(distances, batch.labels(), start, config.steps, config.step_size);
        out.push_back({best.result.loss, best.temperature.value(), metric});
      }
    } catch (const Error& e) {
      throw e.with_layer(l);
    }
  }
  return out;
}

std::vector<std::string> MetricsLog::header() const {
  std::vector<std::string> h{"step", "train_ce", "test_ce", "train_acc", "test_acc"};
  for (std::size_t l = 0; l < layer_count; ++l) h.push_back("ent_layer_" + std::to_string(l));
  for (std::size_t l = 0; l < layer_count; ++l) h.push_back("temp_layer_" + std::to_string(l));
  return h;
}

SplitMetrics evaluate_split(const Params& params, const LabeledBatch& batch) {
  constexpr std::size_t kChunk = 1024;
  double ce_sum = 0.0;
  std::size_t correct = 0;
  std::vector<std::size_t> rows;
  for (std::size_t begin = 0; begin < batch.size(); begin += kChunk) {
    const std::size_t end = std::min(batch.size(), begin + kChunk);
    rows.resize(end - begin);
    std::iota(rows.begin(), rows.end(), begin);
    const Matrix x = batch.points().select_rows(rows);
    const std::span<const int> y(batch.labels().data() + begin, end - begin);
    const ForwardTrace trace = forward(params, x);
    ce_sum += cross_entropy(trace.logits(), y) * static_cast<double>(end - begin);
    const std::vector<int> predicted = predict(trace.probabilities);
    for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == y[i] ? 1 : 0;
  }
  const auto n = static_cast<double>(batch.size());
  return {ce_sum / n, static_cast<double>(correct) / n};
}

namespace {

MetricsRow evaluate_row(std::size_t step, const Params& params, const Dataset& dataset,
                        const LabeledBatch& measure_batch, const MeasureConfig& measure) {
  MetricsRow row;
  row.step = step;
  const SplitMetrics train_metrics = evaluate_split(params, dataset.train);
  row.train_ce = train_metrics.cross_entropy;
  row.train_acc = train_metrics.accuracy;
  if (dataset.test) {
    const SplitMetrics test_metrics = evaluate_split(params, *dataset.test);
    row.test_ce = test_metrics.cross_entropy;
    row.test_acc = test_metrics.accuracy;
  } else {
    row.test_ce = row.test_acc = std::numeric_limits<double>::quiet_NaN();
  }
  for (const LayerEntanglement& e : measure_layer_entanglement(params, measure_batch, measure)) {
    row.entanglement.push_back(e.entanglement);
    row.temperature.push_back(e.temperature);
  }
  return row;
}

}  // namespace

TrainResult train(const Dataset& dataset, const MlpSpec& spec, const CompositeLossConfig& objective,
                  const TrainSchedule& schedule) {
  spec.validate();
  objective.validate(spec);
  const LabeledBatch& data = dataset.train;
  if (data.dims() != spec.input_width()) {
    throw Error(ErrorCode::invalid_input, "dataset dimensionality does not match the model input");
  }
  if (schedule.batch_size < 2 || schedule.batch_size > data.size()) {
    throw Error(ErrorCode::invalid_input, "batch size must lie in [2, training set size]");
  }
  if (schedule.eval_interval == 0) throw Error(ErrorCode::invalid_input, "eval_interval must be >= 1");

  Rng init_rng(derive_seed(schedule.seed, 0));
  Rng batch_rng(derive_seed(schedule.seed, 1));

  TrainResult result;
  result.params = Params::initialize(spec, init_rng);
  result.temperatures = objective.initial_temperatures();
  result.log.layer_count = spec.layer_count();
  AdamState adam(spec, schedule.adam);

  std::vector<std::size_t> measure_rows(std::min(schedule.measure_batch, data.size()));
  std::iota(measure_rows.begin(), measure_rows.end(), std::size_t{0});
  const LabeledBatch measure_batch = data.subset(measure_rows);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();  // forces a shuffle before the first batch

  result.log.rows.push_back(evaluate_row(0, result.params, dataset, measure_batch, schedule.measure));
  for (std::size_t step = 1; step <= schedule.steps; ++step) {
    if (cursor + schedule.batch_size > order.size()) {
      batch_rng.shuffle(std::span<std::size_t>(order));
      cursor = 0;
    }
    const std::span<const std::size_t> rows(order.data() + cursor, schedule.batch_size);
    cursor += schedule.batch_size;

    const LabeledBatch batch = data.subset(rows);
    const ForwardTrace trace = forward(result.params, batch.points());
    const CompositeStep update =
        composite_step(result.params, trace, batch.labels(), objective, result.temperatures);
    adam_step(adam, result.params, update.gradients);

    if (step % schedule.eval_interval == 0 || step == schedule.steps) {
      result.log.rows.push_back(
          evaluate_row(step, result.params, dataset, measure_batch, schedule.measure));
    }
  }
  return result;
}

}  // namespace snnlab
