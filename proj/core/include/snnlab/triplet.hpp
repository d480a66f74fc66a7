#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "snnlab/matrix.hpp"
#include "snnlab/snn_loss.hpp"

namespace snnlab {

struct TripletConfig {
  double margin = 1.0;
  std::uint64_t seed = 0;
};

struct Triplet {
  std::size_t anchor;
  std::size_t positive;
  std::size_t negative;

  bool operator==(const Triplet&) const = default;
};

struct TripletResult {
  double loss = 0.0;
  std::vector<Triplet> triplets;
};

/// One triplet per anchor, in anchor order: a uniformly drawn same-class
/// positive and a uniformly drawn other-class negative. Throws
/// InvalidSampling when a class has one member or the batch has one class.
std::vector<Triplet> sample_triplets(const LabeledBatch& batch, std::uint64_t seed);

/// Mean over triplets of max(0, |a-p|^2 - |a-n|^2 + margin).
double triplet_loss(const Matrix& points, std::span<const Triplet> triplets, double margin);
/// Gradient of the above. A hinge at exactly zero contributes nothing.
Matrix triplet_grad(const Matrix& points, std::span<const Triplet> triplets, double margin);

TripletResult triplet_loss(const LabeledBatch& batch, const TripletConfig& config);
Matrix triplet_grad(const LabeledBatch& batch, const TripletConfig& config);

}  // namespace snnlab
