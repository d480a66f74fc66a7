#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace snnlab {

enum class ErrorCode {
  invalid_input,
  zero_vector,
  empty_reduction,
  no_positive_pairs,
  invalid_temperature,
  invalid_sampling,
  parse_error,
  io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  /// Layer the failure originated from, when raised while evaluating a
  /// per-layer objective or measurement.
  std::optional<std::size_t> layer() const noexcept { return layer_; }

  Error with_layer(std::size_t layer) const;

 private:
  ErrorCode code_;
  std::optional<std::size_t> layer_;
};

}  // namespace snnlab
