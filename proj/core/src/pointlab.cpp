#include "snnlab/pointlab.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "snnlab/error.hpp"
#include "snnlab/numkernel.hpp"
#include "snnlab/triplet.hpp"

namespace snnlab {

namespace {

void validate(const PointOptConfig& config) {
  if (config.steps < 1) throw Error(ErrorCode::invalid_input, "steps must be at least 1");
  if (!(config.step_size > 0.0) || !std::isfinite(config.step_size)) {
    throw Error(ErrorCode::invalid_input, "step_size must be positive");
  }
  if (config.optimize_temperature && !(config.temperature_step > 0.0)) {
    throw Error(ErrorCode::invalid_input, "temperature_step must be positive");
  }
}

struct LossAndGradient {
  double loss;
  Matrix gradient;
};

}  // namespace

Trajectory optimize_points(const LabeledBatch& batch, const PointOptConfig& config) {
  validate(config);
  TemperatureState temperature{Temperature::from_value(config.temperature), config.temperature_step};
  Matrix points = batch.points();
  const auto& labels = batch.labels();

  auto evaluate = [&](std::size_t step, bool advance_temperature) -> LossAndGradient {
    if (config.loss == LossKind::triplet) {
      const auto triplets = sample_triplets(batch, config.seed + step);
      return {triplet_loss(points, triplets, config.triplet_margin),
              triplet_grad(points, triplets, config.triplet_margin)};
    }
    const DistanceMatrix distances = pairwise_distance(points, config.metric);
    SnnGradient grad =
        snn_loss_grad(points, labels, distances, temperature.temperature, config.metric);
    if (config.optimize_temperature && advance_temperature) {
      descend_temperature(distances, labels, temperature);
    }
    return {grad.result.loss, std::move(grad.points)};
  };

  const double sign = config.direction == Direction::minimize ? -1.0 : 1.0;
  Trajectory trajectory;
  for (std::size_t step = 0; step < config.steps; ++step) {
    LossAndGradient current = evaluate(step, true);
    if (!std::isfinite(current.loss)) {
      throw Error(ErrorCode::invalid_input, "loss became non-finite at step " + std::to_string(step));
    }
    if (step == 0 || (config.snapshot_every > 0 && step % config.snapshot_every == 0)) {
      trajectory.snapshots.push_back({step, points, current.loss});
    }
    points.eigen() += sign * config.step_size * current.gradient.eigen();
  }
  const LossAndGradient last = evaluate(config.steps, false);
  trajectory.snapshots.push_back({config.steps, points, last.loss});
  return trajectory;
}

double knn_label_accuracy(const LabeledBatch& batch, std::size_t k) {
  const std::size_t n = batch.size();
  if (k == 0 || k >= n) {
    throw Error(ErrorCode::invalid_input, "k must satisfy 1 <= k < batch size");
  }
  const DistanceMatrix distances = pairwise_sq_euclidean(batch.points());
  const auto& labels = batch.labels();
  std::vector<std::size_t> order(n);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    order.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return distances(i, a) < distances(i, b) ||
                               (distances(i, a) == distances(i, b) && a < b);
                      });
    std::map<int, std::size_t> votes;
    for (std::size_t r = 0; r < k; ++r) ++votes[labels[order[r]]];
    int winner = -1;
    std::size_t best = 0;
    for (const auto& [label, count] : votes) {
      if (count > best) {  // map order gives ties to the lower label
        best = count;
        winner = label;
      }
    }
    correct += winner == labels[i] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

double spread(const Matrix& points) {
  if (points.rows() < 2) throw Error(ErrorCode::invalid_input, "spread needs at least two points");
  const DistanceMatrix distances = pairwise_sq_euclidean(points);
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t j = i + 1; j < points.rows(); ++j) {
      total += std::sqrt(distances(i, j));
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

TwoMeans two_means(const Matrix& points, std::size_t max_iterations) {
  const std::size_t n = points.rows();
  const std::size_t dims = points.cols();
  if (n < 2) throw Error(ErrorCode::invalid_input, "2-means needs at least two points");

  const Eigen::RowVectorXd mean = points.eigen().colwise().mean();
  auto farthest_from = [&](const Eigen::RowVectorXd& ref) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (points.eigen().row(static_cast<Eigen::Index>(i)) - ref).squaredNorm();
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };
  const std::size_t first = farthest_from(mean);
  const std::size_t second = farthest_from(points.eigen().row(static_cast<Eigen::Index>(first)));

  TwoMeans out;
  out.centroids = Matrix(2, dims);
  out.centroids.eigen().row(0) = points.eigen().row(static_cast<Eigen::Index>(first));
  out.centroids.eigen().row(1) = points.eigen().row(static_cast<Eigen::Index>(second));
  out.assignment.assign(n, -1);

  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = points.eigen().row(static_cast<Eigen::Index>(i));
      const double d0 = (row - out.centroids.eigen().row(0)).squaredNorm();
      const double d1 = (row - out.centroids.eigen().row(1)).squaredNorm();
      const int cluster = d1 < d0 ? 1 : 0;
      changed = changed || cluster != out.assignment[i];
      out.assignment[i] = cluster;
    }
    if (!changed) break;
    for (int c = 0; c < 2; ++c) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(dims));
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (out.assignment[i] == c) {
          sum += points.eigen().row(static_cast<Eigen::Index>(i));
          ++count;
        }
      }
      if (count > 0) out.centroids.eigen().row(c) = sum / static_cast<double>(count);
    }
  }
  out.separation = (out.centroids.eigen().row(0) - out.centroids.eigen().row(1)).norm();
  return out;
}

}  // namespace snnlab
