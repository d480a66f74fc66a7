#include "snnlab/snn_loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "snnlab/error.hpp"

namespace snnlab {

Temperature Temperature::from_value(double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorCode::invalid_temperature,
                "temperature must be positive and finite, got " + std::to_string(temperature));
  }
  return from_inverse(1.0 / temperature);
}

Temperature Temperature::from_inverse(double inverse) {
  if (std::isnan(inverse)) {
    throw Error(ErrorCode::invalid_temperature, "inverse temperature is NaN");
  }
  return Temperature(std::clamp(inverse, min_inverse, max_inverse));
}

LabeledBatch::LabeledBatch(Matrix points, std::vector<int> labels)
    : points_(std::move(points)), labels_(std::move(labels)) {
  if (points_.rows() != labels_.size()) {
    throw Error(ErrorCode::invalid_input, "label count " + std::to_string(labels_.size()) +
                                              " does not match point count " +
                                              std::to_string(points_.rows()));
  }
  if (points_.rows() < 2 || points_.cols() == 0) {
    throw Error(ErrorCode::invalid_input, "a labeled batch needs at least two points");
  }
  for (int label : labels_) {
    if (label < 0) throw Error(ErrorCode::invalid_input, "labels must be non-negative");
  }
  if (!points_.all_finite()) {
    throw Error(ErrorCode::invalid_input, "batch contains non-finite coordinates");
  }
}

std::size_t LabeledBatch::class_count() const noexcept {
  int top = -1;
  for (int label : labels_) top = std::max(top, label);
  return static_cast<std::size_t>(top + 1);
}

LabeledBatch LabeledBatch::with_points(Matrix points) const {
  return LabeledBatch(std::move(points), labels_);
}

LabeledBatch LabeledBatch::subset(std::span<const std::size_t> indices) const {
  std::vector<int> labels;
  labels.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= labels_.size()) throw Error(ErrorCode::invalid_input, "subset index out of range");
    labels.push_back(labels_[i]);
  }
  return LabeledBatch(points_.select_rows(indices), std::move(labels));
}

namespace {

// Per-point log-ratio terms and, optionally, the coefficients
// coef(i, j) = d loss / d D(i, j) together with d loss / d beta.
struct SnnTerms {
  SnnResult result;
  Matrix coef;
  double d_beta = 0.0;
};

SnnTerms evaluate_terms(const DistanceMatrix& distances, std::span<const int> labels, double beta,
                        bool with_gradient) {
  const std::size_t n = distances.size();
  if (labels.size() != n) {
    throw Error(ErrorCode::invalid_input, "label count does not match distance matrix size");
  }
  if (n < 2) throw Error(ErrorCode::invalid_input, "need at least two points");

  SnnTerms terms;
  terms.result.per_point.assign(n, std::numeric_limits<double>::quiet_NaN());
  terms.result.temperature_used = 1.0 / beta;
  if (with_gradient) terms.coef = Matrix(n, n);

  std::vector<double> logits(n), weights(n);
  Mask same(n), others(n);
  std::vector<double> dl_dbeta(n, 0.0);
  std::size_t counted = 0;
  double total = 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    bool has_partner = false;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      logits[j] = -distances(i, j) * beta;
      others[j] = j != i;
      same[j] = j != i && labels[j] == labels[i];
      has_partner = has_partner || same[j];
      if (j != i && logits[j] > top) top = logits[j];
    }
    if (!has_partner) {
      ++terms.result.skipped;
      continue;
    }

    // One exponential per pair, shifted by the overall maximum. When the
    // same-class mass underflows that shift, both sums are redone with
    // their own maxima.
    double sum_all = 0.0, sum_same = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      weights[j] = j == i ? 0.0 : std::exp(logits[j] - top);
      sum_all += weights[j];
      if (same[j]) sum_same += weights[j];
    }
    double lse_all = top + std::log(sum_all);
    double lse_same = top + std::log(sum_same);
    const bool shared_shift = sum_same > 1e-250;
    if (!shared_shift) {
      lse_same = logsumexp(logits, same);
      lse_all = logsumexp(logits, others);
    }
    const double term = std::max(0.0, lse_all - lse_same);
    terms.result.per_point[i] = term;
    total += term;
    ++counted;

    if (with_gradient) {
      double db = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        double p_all, p_same;
        if (shared_shift) {
          p_all = weights[j] / sum_all;
          p_same = same[j] ? weights[j] / sum_same : 0.0;
        } else {
          p_all = std::exp(logits[j] - lse_all);
          p_same = same[j] ? std::exp(logits[j] - lse_same) : 0.0;
        }
        terms.coef(i, j) = (p_same - p_all) * beta;
        db += (p_same - p_all) * distances(i, j);
      }
      dl_dbeta[i] = db;
    }
  }

  if (counted == 0) {
    throw Error(ErrorCode::no_positive_pairs, "no point in the batch has a same-class partner");
  }
  const double scale = 1.0 / static_cast<double>(counted);
  terms.result.loss = total * scale;
  if (with_gradient) {
    for (double& c : terms.coef.values()) c *= scale;
    double db = 0.0;
    for (double v : dl_dbeta) db += v;
    terms.d_beta = db * scale;
  }
  return terms;
}

}  // namespace

SnnResult snn_loss(const DistanceMatrix& distances, std::span<const int> labels,
                   Temperature temperature) {
  return evaluate_terms(distances, labels, temperature.inverse(), false).result;
}

SnnResult snn_loss(const LabeledBatch& batch, Temperature temperature, Metric metric) {
  return snn_loss(pairwise_distance(batch.points(), metric), batch.labels(), temperature);
}

SnnGradient snn_loss_grad(const Matrix& points, std::span<const int> labels,
                          const DistanceMatrix& distances, Temperature temperature, Metric metric) {
  const double beta = temperature.inverse();
  SnnTerms terms = evaluate_terms(distances, labels, beta, true);

  // Every D(i, j) depends on both x_i and x_j, so the symmetric weight
  // W = C + C^T collects flow through row i and column i.
  const std::size_t n = points.rows();
  RowMajorMatrix weights = terms.coef.eigen() + terms.coef.eigen().transpose();
  const ConstMatrixMap x = points.eigen();

  SnnGradient grad;
  grad.points = Matrix(n, points.cols());
  if (metric == Metric::euclidean) {
    const Eigen::VectorXd row_sums = weights.rowwise().sum();
    grad.points.eigen() = 2.0 * (row_sums.asDiagonal() * x - weights * x);
  } else {
    const std::vector<double> norms = row_norms_nonzero(points);
    RowMajorMatrix unit = x;
    for (std::size_t i = 0; i < n; ++i) unit.row(static_cast<Eigen::Index>(i)) /= norms[i];
    const RowMajorMatrix pulled = weights * unit;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      double projection = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        projection += weights(ii, static_cast<Eigen::Index>(j)) * (1.0 - distances(i, j));
      }
      grad.points.eigen().row(ii) = -(pulled.row(ii) - projection * unit.row(ii)) / norms[i];
    }
  }
  grad.d_inverse_temperature = terms.d_beta;
  grad.d_temperature = -beta * beta * terms.d_beta;
  grad.result = std::move(terms.result);
  return grad;
}

SnnGradient snn_loss_grad(const LabeledBatch& batch, Temperature temperature, Metric metric) {
  const DistanceMatrix distances = pairwise_distance(batch.points(), metric);
  return snn_loss_grad(batch.points(), batch.labels(), distances, temperature, metric);
}

namespace {

constexpr double kStepGrowth = 1.2;
constexpr double kStepShrink = 0.5;

// One bold-driver step. Returns the loss at the candidate when it was accepted.
std::optional<SnnResult> step_beta(const DistanceMatrix& distances, std::span<const int> labels,
                                   TemperatureState& state, double loss, double gradient) {
  const double beta = state.temperature.inverse();
  if (gradient == 0.0 || !std::isfinite(gradient)) return std::nullopt;
  const Temperature candidate = Temperature::from_inverse(beta - state.step_size * gradient);
  if (candidate.inverse() == beta) return std::nullopt;
  SnnResult trial = evaluate_terms(distances, labels, candidate.inverse(), false).result;
  if (std::isfinite(trial.loss) && trial.loss <= loss) {
    state.temperature = candidate;
    state.step_size *= kStepGrowth;
    return trial;
  }
  state.step_size *= kStepShrink;
  return std::nullopt;
}

}  // namespace

SnnResult descend_temperature(const DistanceMatrix& distances, std::span<const int> labels,
                              TemperatureState& state) {
  if (!(state.step_size > 0.0)) {
    throw Error(ErrorCode::invalid_input, "temperature step size must be positive");
  }
  SnnTerms current = evaluate_terms(distances, labels, state.temperature.inverse(), true);
  step_beta(distances, labels, state, current.result.loss, current.d_beta);
  return std::move(current.result);
}

void descend_temperature(const DistanceMatrix& distances, std::span<const int> labels,
                         TemperatureState& state, const SnnGradient& current) {
  if (!(state.step_size > 0.0)) {
    throw Error(ErrorCode::invalid_input, "temperature step size must be positive");
  }
  if (current.result.temperature_used != state.temperature.value()) {
    throw Error(ErrorCode::invalid_input, "gradient was evaluated at a different temperature");
  }
  step_beta(distances, labels, state, current.result.loss, current.d_inverse_temperature);
}

OptimizedSnn optimized_snn_loss(const DistanceMatrix& distances, std::span<const int> labels,
                                Temperature initial, std::size_t steps, double step_size) {
  if (!(step_size > 0.0)) {
    throw Error(ErrorCode::invalid_input, "temperature step size must be positive");
  }
  TemperatureState state{initial, step_size};
  SnnTerms current = evaluate_terms(distances, labels, initial.inverse(), steps > 0);
  OptimizedSnn best{current.result, initial};

  for (std::size_t step = 0; step < steps; ++step) {
    const std::optional<SnnResult> accepted = step_beta(distances, labels, state, current.result.loss, current.d_beta);
    if (!accepted) {
      if (state.step_size < 1e-300) break;
      continue;
    }
    current = evaluate_terms(distances, labels, state.temperature.inverse(), true);
    if (current.result.loss < best.result.loss) {
      best = OptimizedSnn{current.result, state.temperature};
    }
  }
  return best;
}

OptimizedSnn optimized_snn_loss(const LabeledBatch& batch, Temperature initial, std::size_t steps,
                                double step_size, Metric metric) {
  return optimized_snn_loss(pairwise_distance(batch.points(), metric), batch.labels(), initial,
                            steps, step_size);
}

SnnResult cross_set_entanglement(const Matrix& a, const Matrix& b, Temperature temperature,
                                 Metric metric) {
  if (a.rows() == 0 || b.rows() == 0) {
    throw Error(ErrorCode::invalid_input, "both sets must be non-empty");
  }
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::invalid_input, "sets have different dimensionality");
  }
  Matrix joined(a.rows() + b.rows(), a.cols());
  std::vector<int> labels(a.rows() + b.rows(), 0);
  std::copy(a.values().begin(), a.values().end(), joined.values().begin());
  std::copy(b.values().begin(), b.values().end(),
            joined.values().begin() + static_cast<std::ptrdiff_t>(a.size()));
  std::fill(labels.begin() + static_cast<std::ptrdiff_t>(a.rows()), labels.end(), 1);
  return snn_loss(LabeledBatch(std::move(joined), std::move(labels)), temperature, metric);
}

}  // namespace snnlab
