#include "snnlab/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "snnlab/error.hpp"

namespace snnlab {

void MlpSpec::validate() const {
  if (widths.size() < 3) {
    throw Error(ErrorCode::invalid_input, "an MLP needs an input width, >= 1 hidden layer and a class count");
  }
  for (std::size_t w : widths) {
    if (w == 0) throw Error(ErrorCode::invalid_input, "layer widths must be >= 1");
  }
}

Params Params::initialize(const MlpSpec& spec, Rng& rng) {
  spec.validate();
  Params params;
  params.spec = spec;
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    const std::size_t fan_in = spec.widths[l];
    const std::size_t fan_out = spec.widths[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    DenseLayer layer{Matrix(fan_in, fan_out), std::vector<double>(fan_out, 0.0)};
    for (double& w : layer.weights.values()) w = (2.0 * rng.uniform() - 1.0) * limit;
    params.layers.push_back(std::move(layer));
  }
  return params;
}

Params Params::zeros(const MlpSpec& spec) {
  spec.validate();
  return Params{spec, zero_gradients(spec)};
}

std::size_t Params::parameter_count() const {
  std::size_t total = 0;
  for (const auto& layer : layers) total += layer.weights.size() + layer.bias.size();
  return total;
}

Gradients zero_gradients(const MlpSpec& spec) {
  Gradients grads;
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    grads.push_back({Matrix(spec.widths[l], spec.widths[l + 1]),
                     std::vector<double>(spec.widths[l + 1], 0.0)});
  }
  return grads;
}

Matrix softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto in = logits.row(i);
    auto row = out.row(i);
    const double top = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      row[c] = std::exp(in[c] - top);
      sum += row[c];
    }
    for (double& v : row) v /= sum;
  }
  return out;
}

ForwardTrace forward(const Params& params, const Matrix& x) {
  const MlpSpec& spec = params.spec;
  if (x.cols() != spec.input_width()) {
    throw Error(ErrorCode::invalid_input, "input has " + std::to_string(x.cols()) +
                                              " columns, model expects " +
                                              std::to_string(spec.input_width()));
  }
  if (params.layers.size() != spec.layer_count()) {
    throw Error(ErrorCode::invalid_input, "parameter layer count does not match spec");
  }
  ForwardTrace trace;
  trace.input = x;
  const Matrix* previous = &trace.input;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const DenseLayer& layer = params.layers[l];
    Matrix out(x.rows(), layer.bias.size());
    out.eigen().noalias() = previous->eigen() * layer.weights.eigen();
    const Eigen::Map<const Eigen::RowVectorXd> bias(layer.bias.data(),
                                                    static_cast<Eigen::Index>(layer.bias.size()));
    out.eigen().rowwise() += bias;
    if (l + 1 < params.layers.size()) {
      for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
    }
    trace.activations.push_back(std::move(out));
    previous = &trace.activations.back();
  }
  trace.probabilities = softmax(trace.logits());
  return trace;
}

double cross_entropy(const Matrix& logits, std::span<const int> labels) {
  if (labels.size() != logits.rows() || logits.rows() == 0) {
    throw Error(ErrorCode::invalid_input, "label count does not match logit rows");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= logits.cols()) {
      throw Error(ErrorCode::invalid_input, "label out of range");
    }
    total += logsumexp(logits.row(i)) - logits(i, static_cast<std::size_t>(labels[i]));
  }
  return total / static_cast<double>(logits.rows());
}

Matrix cross_entropy_logit_grad(const Matrix& probabilities, std::span<const int> labels) {
  Matrix grad = probabilities;
  const double scale = 1.0 / static_cast<double>(probabilities.rows());
  for (std::size_t i = 0; i < grad.rows(); ++i) {
    grad(i, static_cast<std::size_t>(labels[i])) -= 1.0;
  }
  grad.eigen() *= scale;
  return grad;
}

std::vector<int> predict(const Matrix& probabilities) {
  std::vector<int> out(probabilities.rows());
  for (std::size_t i = 0; i < probabilities.rows(); ++i) {
    auto row = probabilities.row(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double accuracy(const Matrix& probabilities, std::span<const int> labels) {
  const std::vector<int> predicted = predict(probabilities);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

Backprop backpropagate(const Params& params, const ForwardTrace& trace, const Matrix& logit_grad,
                       std::span<const Matrix> activation_grads, bool want_params,
                       bool want_input) {
  const std::size_t layers = params.layers.size();
  Backprop out;
  if (want_params) out.params = zero_gradients(params.spec);

  RowMajorMatrix upstream = logit_grad.eigen();
  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& below = l == 0 ? trace.input : trace.activations[l - 1];
    if (want_params) {
      out.params[l].weights.eigen().noalias() = below.eigen().transpose() * upstream;
      const Eigen::RowVectorXd bias = upstream.colwise().sum();
      std::copy(bias.data(), bias.data() + bias.size(), out.params[l].bias.begin());
    }
    if (l == 0 && !want_input) break;
    RowMajorMatrix next = upstream * params.layers[l].weights.eigen().transpose();
    if (l > 0) {
      if (l - 1 < activation_grads.size() && !activation_grads[l - 1].empty()) {
        next += activation_grads[l - 1].eigen();
      }
      // ReLU: the post-activation is positive exactly where the unit was active.
      next = (below.eigen().array() > 0.0).select(next, 0.0);
    }
    upstream = std::move(next);
  }
  if (want_input) out.input = Matrix::from_eigen(upstream);
  return out;
}

}  // namespace snnlab
