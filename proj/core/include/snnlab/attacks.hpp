#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>

#include "snnlab/matrix.hpp"
#include "snnlab/mlp.hpp"

namespace snnlab {

struct AttackConfig {
  double epsilon = 0.3;     ///< L-infinity budget
  double step_size = 0.01;  ///< per-iteration step (BIM)
  std::size_t steps = 1;
  /// When set, every input is pushed toward this class instead of away
  /// from its true label.
  std::optional<int> target;
  double clip_min = 0.0;
  double clip_max = 1.0;

  void validate() const;
};

/// Per-row gradient of the cross-entropy of `labels` with respect to the
/// input. Each row is the gradient of that example's own loss.
Matrix input_gradient(const Params& params, const Matrix& x, std::span<const int> labels);

/// Single signed-gradient step of size epsilon, clipped to the valid range.
Matrix fgsm(const Params& params, const Matrix& x, std::span<const int> labels,
            const AttackConfig& config);

using IterateObserver = std::function<void(std::size_t step, const Matrix& iterate)>;

/// Iterated signed-gradient steps, each followed by projection onto the
/// epsilon ball around x intersected with [clip_min, clip_max].
Matrix bim(const Params& params, const Matrix& x, std::span<const int> labels,
           const AttackConfig& config, const IterateObserver& observer = {});

}  // namespace snnlab
