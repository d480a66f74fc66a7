#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "snnlab/matrix.hpp"
#include "snnlab/mlp.hpp"
#include "snnlab/numkernel.hpp"
#include "snnlab/snn_loss.hpp"

namespace snnlab {

struct DknnConfig {
  std::size_t k = 10;
  /// Indices into the forward trace (hidden layers, then logits). Unset
  /// means all of them; an empty list is rejected.
  std::optional<std::vector<std::size_t>> layers;
  /// One per indexed layer; empty means euclidean everywhere.
  std::vector<Metric> metrics;
};

/// Labels of the k nearest training points, one list per indexed layer.
struct NeighborLabels {
  std::vector<std::vector<int>> per_layer;
};

/// Exact (brute-force) k-nearest-neighbor index over the training
/// representations of every selected layer. Neighbors at equal distance
/// are ordered by training index.
class DknnIndex {
 public:
  static DknnIndex build(const Params& params, const LabeledBatch& train, const DknnConfig& config);

  std::size_t k() const noexcept { return k_; }
  std::size_t class_count() const noexcept { return classes_; }
  std::size_t train_size() const noexcept { return labels_.size(); }
  const std::vector<std::size_t>& layers() const noexcept { return layers_; }
  const Params& params() const noexcept { return params_; }

  /// For each query row and indexed layer, the k nearest training indices
  /// in increasing distance.
  std::vector<std::vector<std::vector<std::size_t>>> neighbors(const ForwardTrace& trace) const;
  std::vector<NeighborLabels> neighbor_labels(const ForwardTrace& trace) const;
  std::vector<NeighborLabels> neighbor_labels(const Matrix& x) const;

 private:
  Params params_;
  std::size_t k_ = 0;
  std::size_t classes_ = 0;
  std::vector<std::size_t> layers_;
  std::vector<Metric> metrics_;
  std::vector<Matrix> representations_;
  std::vector<std::vector<double>> sq_norms_;
  std::vector<int> labels_;
};

/// Number of neighbors, summed over layers, whose label differs from `candidate`.
int nonconformity(const NeighborLabels& neighbors, int candidate);
std::vector<int> nonconformity(const DknnIndex& index, const ForwardTrace& trace, int candidate);

/// Sorted nonconformity scores of a holdout set at its true labels.
class Calibration {
 public:
  static Calibration from_scores(std::vector<int> scores);

  std::span<const int> scores() const noexcept { return scores_; }
  std::size_t size() const noexcept { return scores_.size(); }
  /// Fraction of calibration scores >= score.
  double p_value(int score) const;

 private:
  std::vector<int> scores_;
};

Calibration calibrate(const DknnIndex& index, const LabeledBatch& holdout);

struct CredibilityResult {
  int predicted = 0;
  double credibility = 0.0;
  double confidence = 0.0;
  int nonconformity = 0;  ///< of the predicted class
  std::vector<double> p_values;
  NeighborLabels neighbors;
};

/// p_j for every class j; prediction is the arg max (ties to the lower
/// class), credibility the max, confidence one minus the runner-up.
CredibilityResult credibility(const NeighborLabels& neighbors, const Calibration& calibration,
                              std::size_t class_count);
std::vector<CredibilityResult> credibility(const DknnIndex& index, const Calibration& calibration,
                                           const Matrix& x);

struct CurvePoint {
  double group = 0.0;
  double mean_credibility = 0.0;
  double accuracy = 0.0;
  std::size_t count = 0;
};

struct CalibrationCurve {
  std::vector<CurvePoint> points;
  /// Pearson correlation of mean credibility against accuracy across
  /// points; empty with fewer than two points or zero variance.
  std::optional<double> correlation;
};

/// One point per distinct group key (e.g. attack epsilon), in ascending key order.
CalibrationCurve calibration_curve(std::span<const CredibilityResult> results,
                                   const std::vector<bool>& correct, std::span<const double> groups);
/// One point per non-empty credibility bin of width 1/bins.
CalibrationCurve calibration_curve_binned(std::span<const CredibilityResult> results,
                                          const std::vector<bool>& correct, std::size_t bins);

std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

}  // namespace snnlab
