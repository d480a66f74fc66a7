#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "snnlab/matrix.hpp"
#include "snnlab/numkernel.hpp"

namespace snnlab {

/// Fully connected classifier: widths[0] inputs, ReLU hidden layers,
/// widths.back() logits followed by softmax.
struct MlpSpec {
  std::vector<std::size_t> widths;

  /// Throws InvalidInput unless there is at least one hidden layer and all widths are >= 1.
  void validate() const;

  std::size_t input_width() const { return widths.front(); }
  std::size_t class_count() const { return widths.back(); }
  /// Number of affine layers (hidden layers plus the logit layer).
  std::size_t layer_count() const { return widths.size() - 1; }
  std::size_t hidden_count() const { return widths.size() - 2; }

  bool operator==(const MlpSpec&) const = default;
};

struct DenseLayer {
  Matrix weights;  ///< fan_in x fan_out
  std::vector<double> bias;

  bool operator==(const DenseLayer&) const = default;
};

struct Params {
  MlpSpec spec;
  std::vector<DenseLayer> layers;

  /// Uniform(-sqrt(6 / fan_in), sqrt(6 / fan_in)) weights, zero biases.
  static Params initialize(const MlpSpec& spec, Rng& rng);
  static Params zeros(const MlpSpec& spec);

  std::size_t parameter_count() const;
  bool operator==(const Params&) const = default;
};

/// Gradient with the same layout as Params.
using Gradients = std::vector<DenseLayer>;

Gradients zero_gradients(const MlpSpec& spec);

struct ForwardTrace {
  Matrix input;
  /// f^1 .. f^k: post-ReLU hidden activations, then the logits.
  std::vector<Matrix> activations;
  Matrix probabilities;

  const Matrix& logits() const { return activations.back(); }
  std::size_t layer_count() const { return activations.size(); }
};

ForwardTrace forward(const Params& params, const Matrix& x);

/// Row-wise softmax with max subtraction.
Matrix softmax(const Matrix& logits);

/// Mean over rows of -log softmax(logits)[label].
double cross_entropy(const Matrix& logits, std::span<const int> labels);

/// (softmax - onehot) / rows: gradient of the mean cross-entropy wrt logits.
Matrix cross_entropy_logit_grad(const Matrix& probabilities, std::span<const int> labels);

std::vector<int> predict(const Matrix& probabilities);
double accuracy(const Matrix& probabilities, std::span<const int> labels);

struct Backprop {
  Gradients params;
  Matrix input;  ///< empty unless requested
};

/// Reverse pass through the network. `activation_grads[l]` (optional,
/// empty matrices allowed) adds a direct gradient on hidden activation f^{l+1}.
Backprop backpropagate(const Params& params, const ForwardTrace& trace, const Matrix& logit_grad,
                       std::span<const Matrix> activation_grads, bool want_params,
                       bool want_input);

}  // namespace snnlab
