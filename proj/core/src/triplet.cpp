#include "snnlab/triplet.hpp"

#include <cmath>
#include <map>
#include <string>

#include "snnlab/error.hpp"
#include "snnlab/numkernel.hpp"

namespace snnlab {

namespace {

void require_margin(double margin) {
  if (!(margin >= 0.0) || !std::isfinite(margin)) {
    throw Error(ErrorCode::invalid_input, "triplet margin must be non-negative");
  }
}

double sq_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

}  // namespace

std::vector<Triplet> sample_triplets(const LabeledBatch& batch, std::uint64_t seed) {
  const auto& labels = batch.labels();
  std::map<int, std::size_t> counts;
  for (int label : labels) ++counts[label];
  if (counts.size() < 2) {
    throw Error(ErrorCode::invalid_sampling, "triplets need at least two classes");
  }
  for (const auto& [label, count] : counts) {
    if (count < 2) {
      throw Error(ErrorCode::invalid_sampling,
                  "class " + std::to_string(label) + " has a single member");
    }
  }

  Rng rng(seed);
  std::vector<Triplet> triplets;
  triplets.reserve(labels.size());
  std::vector<std::size_t> positives, negatives;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    positives.clear();
    negatives.clear();
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (j == i) continue;
      (labels[j] == labels[i] ? positives : negatives).push_back(j);
    }
    const std::size_t p = positives[rng.uniform_index(positives.size())];
    const std::size_t q = negatives[rng.uniform_index(negatives.size())];
    triplets.push_back({i, p, q});
  }
  return triplets;
}

double triplet_loss(const Matrix& points, std::span<const Triplet> triplets, double margin) {
  require_margin(margin);
  if (triplets.empty()) throw Error(ErrorCode::invalid_input, "no triplets");
  double total = 0.0;
  for (const Triplet& t : triplets) {
    const double hinge = sq_distance(points.row(t.anchor), points.row(t.positive)) -
                         sq_distance(points.row(t.anchor), points.row(t.negative)) + margin;
    if (hinge > 0.0) total += hinge;
  }
  return total / static_cast<double>(triplets.size());
}

Matrix triplet_grad(const Matrix& points, std::span<const Triplet> triplets, double margin) {
  require_margin(margin);
  if (triplets.empty()) throw Error(ErrorCode::invalid_input, "no triplets");
  Matrix grad(points.rows(), points.cols());
  const double scale = 1.0 / static_cast<double>(triplets.size());
  for (const Triplet& t : triplets) {
    auto a = points.row(t.anchor);
    auto p = points.row(t.positive);
    auto n = points.row(t.negative);
    const double hinge = sq_distance(a, p) - sq_distance(a, n) + margin;
    if (!(hinge > 0.0)) continue;
    for (std::size_t d = 0; d < points.cols(); ++d) {
      // d/da = 2(a-p) - 2(a-n) = 2(n-p); d/dp = -2(a-p); d/dn = 2(a-n)
      grad(t.anchor, d) += scale * 2.0 * (n[d] - p[d]);
      grad(t.positive, d) -= scale * 2.0 * (a[d] - p[d]);
      grad(t.negative, d) += scale * 2.0 * (a[d] - n[d]);
    }
  }
  return grad;
}

TripletResult triplet_loss(const LabeledBatch& batch, const TripletConfig& config) {
  require_margin(config.margin);
  TripletResult result;
  result.triplets = sample_triplets(batch, config.seed);
  result.loss = triplet_loss(batch.points(), result.triplets, config.margin);
  return result;
}

Matrix triplet_grad(const LabeledBatch& batch, const TripletConfig& config) {
  require_margin(config.margin);
  const std::vector<Triplet> triplets = sample_triplets(batch, config.seed);
  return triplet_grad(batch.points(), triplets, config.margin);
}

}  // namespace snnlab
