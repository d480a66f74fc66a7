#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "snnlab/matrix.hpp"
#include "snnlab/numkernel.hpp"

namespace snnlab {

/// Positive temperature, stored through its inverse beta = 1/T. Beta is
/// clamped into [min_inverse, max_inverse].
class Temperature {
 public:
  static constexpr double min_inverse = 1e-8;
  static constexpr double max_inverse = 1e8;

  /// Throws InvalidTemperature for non-positive or non-finite values.
  static Temperature from_value(double temperature);
  static Temperature from_inverse(double inverse);

  double value() const noexcept { return 1.0 / inverse_; }
  double inverse() const noexcept { return inverse_; }

 private:
  explicit Temperature(double inverse) : inverse_(inverse) {}
  double inverse_;
};

/// Points (one per row) with a non-negative integer class label each.
class LabeledBatch {
 public:
  LabeledBatch(Matrix points, std::vector<int> labels);

  const Matrix& points() const noexcept { return points_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dims() const noexcept { return points_.cols(); }

  /// One past the largest label.
  std::size_t class_count() const noexcept;

  LabeledBatch with_points(Matrix points) const;
  LabeledBatch subset(std::span<const std::size_t> indices) const;

 private:
  Matrix points_;
  std::vector<int> labels_;
};

struct SnnResult {
  double loss = 0.0;
  /// -log ratio for each point; NaN for points without a same-class partner.
  std::vector<double> per_point;
  std::size_t skipped = 0;
  double temperature_used = 0.0;
};

/// Soft nearest neighbor loss at a fixed temperature. Points with no
/// same-class partner are left out of the mean and counted in `skipped`.
SnnResult snn_loss(const LabeledBatch& batch, Temperature temperature,
                   Metric metric = Metric::euclidean);
SnnResult snn_loss(const DistanceMatrix& distances, std::span<const int> labels,
                   Temperature temperature);

struct SnnGradient {
  Matrix points;                  ///< d loss / d point coordinates
  double d_temperature = 0.0;     ///< d loss / d T
  double d_inverse_temperature = 0.0;  ///< d loss / d (1/T)
  SnnResult result;
};

SnnGradient snn_loss_grad(const LabeledBatch& batch, Temperature temperature,
                          Metric metric = Metric::euclidean);
/// Same as above with the distance matrix of `points` already computed.
SnnGradient snn_loss_grad(const Matrix& points, std::span<const int> labels,
                          const DistanceMatrix& distances, Temperature temperature, Metric metric);

/// Learned temperature for one representation. Beta follows gradient descent
/// with a bold-driver step: an improving step is kept and grows the step size
/// by 1.2, a worsening one is discarded and halves it.
struct TemperatureState {
  Temperature temperature = Temperature::from_value(100.0);
  double step_size = 0.1;
};

/// Evaluates the loss at the state's temperature, then takes one descent step
/// on beta. The returned result is for the temperature before the step.
SnnResult descend_temperature(const DistanceMatrix& distances, std::span<const int> labels,
                              TemperatureState& state);
/// Descent step reusing a gradient already evaluated at the state's temperature.
void descend_temperature(const DistanceMatrix& distances, std::span<const int> labels,
                         TemperatureState& state, const SnnGradient& current);

struct OptimizedSnn {
  SnnResult result;         ///< lowest loss seen along the descent
  Temperature temperature;  ///< temperature that produced it
};

/// Minimum of the loss over temperatures, approximated by `steps` descent
/// steps on beta from `initial`.
OptimizedSnn optimized_snn_loss(const LabeledBatch& batch, Temperature initial, std::size_t steps,
                                double step_size, Metric metric = Metric::euclidean);
OptimizedSnn optimized_snn_loss(const DistanceMatrix& distances, std::span<const int> labels,
                                Temperature initial, std::size_t steps, double step_size);

/// Entanglement between two sets: `a` labeled 0, `b` labeled 1.
SnnResult cross_set_entanglement(const Matrix& a, const Matrix& b, Temperature temperature,
                                 Metric metric = Metric::euclidean);

}  // namespace snnlab
