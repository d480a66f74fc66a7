#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "snnlab/matrix.hpp"
#include "snnlab/snn_loss.hpp"

namespace snnlab {

enum class LossKind { snn, triplet };
enum class Direction { minimize, maximize };

struct PointOptConfig {
  LossKind loss = LossKind::snn;
  Direction direction = Direction::minimize;
  std::size_t steps = 500;
  double step_size = 1.0;
  /// Fixed temperature, or the starting one when optimize_temperature is set.
  double temperature = 1.0;
  bool optimize_temperature = false;
  double temperature_step = 0.1;
  Metric metric = Metric::euclidean;
  double triplet_margin = 1.0;
  /// Triplets are redrawn every step with seed + step.
  std::uint64_t seed = 0;
  /// Snapshot period; 0 keeps only the first and last step.
  std::size_t snapshot_every = 0;
};

struct Snapshot {
  std::size_t step = 0;
  Matrix points;
  double loss = 0.0;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
};

/// Plain gradient descent (ascent for maximize) on the point coordinates.
Trajectory optimize_points(const LabeledBatch& batch, const PointOptConfig& config);

/// Fraction of points whose k nearest other points (squared euclidean,
/// ties to the lower index) vote for their own label; vote ties go to the
/// lower class id.
double knn_label_accuracy(const LabeledBatch& batch, std::size_t k);

/// Mean euclidean distance over unordered pairs.
double spread(const Matrix& points);

struct TwoMeans {
  Matrix centroids;  ///< 2 x dims
  std::vector<int> assignment;
  double separation = 0.0;  ///< euclidean distance between the centroids
};

/// Deterministic 2-means: Lloyd iterations seeded with the point farthest
/// from the mean and the point farthest from that one.
TwoMeans two_means(const Matrix& points, std::size_t max_iterations = 100);

}  // namespace snnlab
