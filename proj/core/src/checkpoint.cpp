#include "snnlab/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "snnlab/error.hpp"

namespace snnlab {

namespace {

constexpr std::array<char, 8> kMagic{'S', 'N', 'N', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::vector<unsigned char>& out, T value) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

class Reader {
 public:
  Reader(std::vector<unsigned char> bytes, std::string name) : bytes_(std::move(bytes)), name_(std::move(name)) {}

  template <typename T>
  T get() {
    if (bytes_.size() - offset_ < sizeof(T)) {
      throw Error(ErrorCode::parse_error,
                  name_ + ": truncated checkpoint at offset " + std::to_string(offset_));
    }
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + offset_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    T value;
    std::memcpy(&value, raw, sizeof(T));
    offset_ += sizeof(T);
    return value;
  }

  std::size_t offset() const { return offset_; }
  std::size_t size() const { return bytes_.size(); }
  const std::string& name() const { return name_; }

 private:
  std::vector<unsigned char> bytes_;
  std::string name_;
  std::size_t offset_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Params& params) {
  params.spec.validate();
  std::vector<unsigned char> out(kMagic.begin(), kMagic.end());
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.spec.widths.size()));
  for (std::size_t w : params.spec.widths) put<std::uint64_t>(out, w);
  for (const DenseLayer& layer : params.layers) {
    for (double v : layer.weights.values()) put<double>(out, v);
    for (double v : layer.bias) put<double>(out, v);
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

Params load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::io_error, "cannot open checkpoint " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  Reader in(std::move(bytes), path.string());

  for (char expected : kMagic) {
    const auto offset = in.offset();
    if (static_cast<char>(in.get<unsigned char>()) != expected) {
      throw Error(ErrorCode::parse_error,
                  in.name() + ": bad checkpoint magic at offset " + std::to_string(offset));
    }
  }
  const auto version = in.get<std::uint32_t>();
  if (version != kVersion) {
    throw Error(ErrorCode::parse_error, in.name() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto width_count = in.get<std::uint32_t>();
  if (width_count < 3 || width_count > 64) {
    throw Error(ErrorCode::parse_error, in.name() + ": implausible layer count " + std::to_string(width_count));
  }
  MlpSpec spec;
  for (std::uint32_t i = 0; i < width_count; ++i) {
    const auto w = in.get<std::uint64_t>();
    if (w == 0 || w > (std::uint64_t{1} << 24)) {
      throw Error(ErrorCode::parse_error, in.name() + ": implausible width " + std::to_string(w));
    }
    spec.widths.push_back(static_cast<std::size_t>(w));
  }
  Params params = Params::zeros(spec);
  for (DenseLayer& layer : params.layers) {
    for (std::size_t r = 0; r < layer.weights.rows(); ++r) {
      for (std::size_t c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = in.get<double>();
    }
    for (double& b : layer.bias) b = in.get<double>();
  }
  if (in.offset() != in.size()) {
    throw Error(ErrorCode::parse_error,
                in.name() + ": trailing bytes after offset " + std::to_string(in.offset()));
  }
  return params;
}

}  // namespace snnlab
