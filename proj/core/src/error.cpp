#include "snnlab/error.hpp"

namespace snnlab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "InvalidInput";
    case ErrorCode::zero_vector: return "ZeroVector";
    case ErrorCode::empty_reduction: return "EmptyReduction";
    case ErrorCode::no_positive_pairs: return "NoPositivePairs";
    case ErrorCode::invalid_temperature: return "InvalidTemperature";
    case ErrorCode::invalid_sampling: return "InvalidSampling";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::io_error: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

Error Error::with_layer(std::size_t layer) const {
  Error copy(code_, std::string(what()).substr(to_string(code_).size() + 2) +
                        " (layer " + std::to_string(layer) + ")");
  copy.layer_ = layer;
  return copy;
}

}  // namespace snnlab
