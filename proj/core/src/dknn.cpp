#include "snnlab/dknn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "snnlab/error.hpp"

namespace snnlab {

namespace {

constexpr std::size_t kQueryChunk = 256;

double sq_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double exact_distance(std::span<const double> a, std::span<const double> b, Metric metric,
                      double a_norm, double b_norm) {
  if (metric == Metric::euclidean) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
      const double diff = a[d] - b[d];
      s += diff * diff;
    }
    return s;
  }
  double dot = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) dot += a[d] * b[d];
  return 1.0 - std::clamp(dot / (a_norm * b_norm), -1.0, 1.0);
}

}  // namespace

DknnIndex DknnIndex::build(const Params& params, const LabeledBatch& train, const DknnConfig& config) {
  if (config.k == 0 || config.k >= train.size()) {
    throw Error(ErrorCode::invalid_input, "k must satisfy 1 <= k < training size");
  }
  const std::size_t trace_layers = params.spec.layer_count();
  DknnIndex index;
  index.params_ = params;
  index.k_ = config.k;
  index.labels_ = train.labels();
  index.classes_ = std::max(train.class_count(), params.spec.class_count());
  if (config.layers) {
    index.layers_ = *config.layers;
  } else {
    index.layers_.resize(trace_layers);
    std::iota(index.layers_.begin(), index.layers_.end(), std::size_t{0});
  }
  if (index.layers_.empty()) throw Error(ErrorCode::invalid_input, "no layers to index");
  for (std::size_t layer : index.layers_) {
    if (layer >= trace_layers) {
      throw Error(ErrorCode::invalid_input, "layer " + std::to_string(layer) + " does not exist");
    }
  }
  if (!config.metrics.empty() && config.metrics.size() != index.layers_.size()) {
    throw Error(ErrorCode::invalid_input, "one metric per indexed layer is required");
  }
  index.metrics_ = config.metrics.empty()
                       ? std::vector<Metric>(index.layers_.size(), Metric::euclidean)
                       : config.metrics;

  const ForwardTrace trace = forward(params, train.points());
  for (std::size_t s = 0; s < index.layers_.size(); ++s) {
    const Matrix& reps = trace.activations[index.layers_[s]];
    std::vector<double> norms(reps.rows());
    for (std::size_t i = 0; i < reps.rows(); ++i) norms[i] = sq_norm(reps.row(i));
    if (index.metrics_[s] == Metric::cosine) {
      for (std::size_t i = 0; i < norms.size(); ++i) {
        if (norms[i] == 0.0) {
          throw Error(ErrorCode::zero_vector, "training representation " + std::to_string(i) +
                                                  " has zero norm in layer " +
                                                  std::to_string(index.layers_[s]));
        }
      }
    }
    index.representations_.push_back(reps);
    index.sq_norms_.push_back(std::move(norms));
  }
  return index;
}

std::vector<std::vector<std::vector<std::size_t>>> DknnIndex::neighbors(const ForwardTrace& trace) const {
  const std::size_t queries = trace.input.rows();
  std::vector<std::vector<std::vector<std::size_t>>> out(
      queries, std::vector<std::vector<std::size_t>>(layers_.size()));
  const std::size_t n = labels_.size();
  std::vector<std::size_t> candidates;
  std::vector<std::pair<double, std::size_t>> exact;
  std::vector<double> row_approx(n);

  for (std::size_t s = 0; s < layers_.size(); ++s) {
    const Matrix& reps = representations_[s];
    const std::vector<double>& norms = sq_norms_[s];
    const Matrix& q = trace.activations.at(layers_[s]);
    const double max_norm = *std::max_element(norms.begin(), norms.end());
    const bool cosine = metrics_[s] == Metric::cosine;

    for (std::size_t begin = 0; begin < queries; begin += kQueryChunk) {
      const std::size_t end = std::min(queries, begin + kQueryChunk);
      const auto rows = static_cast<Eigen::Index>(end - begin);
      // Inner products through GEMM give approximate distances; the exact
      // loop distance then ranks every candidate within rounding slack of
      // the k-th approximate distance, so the result equals brute force.
      const RowMajorMatrix dots =
          q.eigen().middleRows(static_cast<Eigen::Index>(begin), rows) * reps.eigen().transpose();
      for (std::size_t r = begin; r < end; ++r) {
        const auto qrow = q.row(r);
        const double qn = sq_norm(qrow);
        if (cosine && qn == 0.0) {
          throw Error(ErrorCode::zero_vector, "query representation has zero norm");
        }
        const double q_len = std::sqrt(qn);
        for (std::size_t j = 0; j < n; ++j) {
          const double dot = dots(static_cast<Eigen::Index>(r - begin), static_cast<Eigen::Index>(j));
          row_approx[j] = cosine ? 1.0 - dot / (q_len * std::sqrt(norms[j])) : qn + norms[j] - 2.0 * dot;
        }
        std::vector<double> sorted = row_approx;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k_ - 1), sorted.end());
        const double slack = cosine ? 1e-9 : 1e-9 * (qn + max_norm) + 1e-12;
        const double threshold = sorted[k_ - 1] + 2.0 * slack;

        candidates.clear();
        for (std::size_t j = 0; j < n; ++j) {
          if (row_approx[j] <= threshold) candidates.push_back(j);
        }
        exact.clear();
        for (std::size_t j : candidates) {
          exact.emplace_back(exact_distance(qrow, reps.row(j), metrics_[s], q_len, std::sqrt(norms[j])), j);
        }
        std::partial_sort(exact.begin(), exact.begin() + static_cast<std::ptrdiff_t>(k_), exact.end());
        auto& slot = out[r][s];
        slot.resize(k_);
        for (std::size_t i = 0; i < k_; ++i) slot[i] = exact[i].second;
      }
    }
  }
  return out;
}

std::vector<NeighborLabels> DknnIndex::neighbor_labels(const ForwardTrace& trace) const {
  const auto indices = neighbors(trace);
  std::vector<NeighborLabels> out(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    for (const auto& layer : indices[r]) {
      std::vector<int> labels;
      labels.reserve(layer.size());
      for (std::size_t j : layer) labels.push_back(labels_[j]);
      out[r].per_layer.push_back(std::move(labels));
    }
  }
  return out;
}

std::vector<NeighborLabels> DknnIndex::neighbor_labels(const Matrix& x) const {
  return neighbor_labels(forward(params_, x));
}

int nonconformity(const NeighborLabels& neighbors, int candidate) {
  int disagreements = 0;
  for (const auto& layer : neighbors.per_layer) {
    for (int label : layer) disagreements += label != candidate ? 1 : 0;
  }
  return disagreements;
}

std::vector<int> nonconformity(const DknnIndex& index, const ForwardTrace& trace, int candidate) {
  std::vector<int> out;
  for (const NeighborLabels& n : index.neighbor_labels(trace)) out.push_back(nonconformity(n, candidate));
  return out;
}

Calibration Calibration::from_scores(std::vector<int> scores) {
  if (scores.empty()) throw Error(ErrorCode::invalid_input, "calibration needs at least one score");
  std::sort(scores.begin(), scores.end());
  Calibration c;
  c.scores_ = std::move(scores);
  return c;
}

double Calibration::p_value(int score) const {
  const auto first = std::lower_bound(scores_.begin(), scores_.end(), score);
  return static_cast<double>(scores_.end() - first) / static_cast<double>(scores_.size());
}

Calibration calibrate(const DknnIndex& index, const LabeledBatch& holdout) {
  const std::vector<NeighborLabels> neighbors = index.neighbor_labels(holdout.points());
  std::vector<int> scores;
  scores.reserve(neighbors.size());
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    scores.push_back(nonconformity(neighbors[i], holdout.labels()[i]));
  }
  return Calibration::from_scores(std::move(scores));
}

CredibilityResult credibility(const NeighborLabels& neighbors, const Calibration& calibration,
                              std::size_t class_count) {
  if (class_count == 0) throw Error(ErrorCode::invalid_input, "class count must be positive");
  CredibilityResult result;
  result.p_values.resize(class_count);
  std::vector<int> scores(class_count);
  for (std::size_t j = 0; j < class_count; ++j) {
    scores[j] = nonconformity(neighbors, static_cast<int>(j));
    result.p_values[j] = calibration.p_value(scores[j]);
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j < class_count; ++j) {
    if (result.p_values[j] > result.p_values[best]) best = j;
  }
  double runner_up = 0.0;
  for (std::size_t j = 0; j < class_count; ++j) {
    if (j != best) runner_up = std::max(runner_up, result.p_values[j]);
  }
  result.predicted = static_cast<int>(best);
  result.credibility = result.p_values[best];
  result.confidence = 1.0 - runner_up;
  result.nonconformity = scores[best];
  result.neighbors = neighbors;
  return result;
}

std::vector<CredibilityResult> credibility(const DknnIndex& index, const Calibration& calibration,
                                           const Matrix& x) {
  std::vector<CredibilityResult> out;
  for (const NeighborLabels& n : index.neighbor_labels(x)) {
    out.push_back(credibility(n, calibration, index.class_count()));
  }
  return out;
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) return std::nullopt;
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return std::nullopt;
  return cov / std::sqrt(va * vb);
}

namespace {

CalibrationCurve curve_from_groups(std::span<const CredibilityResult> results,
                                   const std::vector<bool>& correct,
                                   const std::vector<double>& keys) {
  if (results.empty()) throw Error(ErrorCode::invalid_input, "calibration curve needs results");
  if (correct.size() != results.size() || keys.size() != results.size()) {
    throw Error(ErrorCode::invalid_input, "results, correctness and groups differ in length");
  }
  struct Acc {
    double credibility = 0.0;
    std::size_t correct = 0;
    std::size_t count = 0;
  };
  std::map<double, Acc> groups;
  for (std::size_t i = 0; i < results.size(); ++i) {
    Acc& acc = groups[keys[i]];
    acc.credibility += results[i].credibility;
    acc.correct += correct[i] ? 1 : 0;
    ++acc.count;
  }
  CalibrationCurve curve;
  std::vector<double> cred, acc;
  for (const auto& [key, g] : groups) {
    const auto n = static_cast<double>(g.count);
    curve.points.push_back({key, g.credibility / n, static_cast<double>(g.correct) / n, g.count});
    cred.push_back(curve.points.back().mean_credibility);
    acc.push_back(curve.points.back().accuracy);
  }
  curve.correlation = pearson(cred, acc);
  return curve;
}

}  // namespace

CalibrationCurve calibration_curve(std::span<const CredibilityResult> results,
                                   const std::vector<bool>& correct, std::span<const double> groups) {
  return curve_from_groups(results, correct, {groups.begin(), groups.end()});
}

CalibrationCurve calibration_curve_binned(std::span<const CredibilityResult> results,
                                          const std::vector<bool>& correct, std::size_t bins) {
  if (bins == 0) throw Error(ErrorCode::invalid_input, "bins must be positive");
  std::vector<double> keys;
  for (const auto& r : results) {
    const auto bin = std::min(bins - 1, static_cast<std::size_t>(r.credibility * static_cast<double>(bins)));
    keys.push_back(static_cast<double>(bin));
  }
  return curve_from_groups(results, correct, keys);
}

}  // namespace snnlab
