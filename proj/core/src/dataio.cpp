#include "snnlab/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "snnlab/error.hpp"

namespace snnlab {

LabeledBatch gen_gaussian_blobs(Rng& rng, const BlobSpec& spec) {
  if (spec.classes == 0 || spec.modes_per_class == 0 || spec.dims == 0) {
    throw Error(ErrorCode::invalid_input, "classes, modes_per_class and dims must be >= 1");
  }
  if (spec.n < spec.classes || spec.n < 2) {
    throw Error(ErrorCode::invalid_input, "n must be at least the class count (and >= 2)");
  }
  if (!(spec.stddev > 0.0) || !(spec.center_scale >= 0.0)) {
    throw Error(ErrorCode::invalid_input, "stddev must be positive and center_scale non-negative");
  }
  const std::size_t components = spec.label_mode == LabelMode::by_cluster
                                     ? spec.classes * spec.modes_per_class
                                     : spec.modes_per_class;
  Matrix centers(components, spec.dims);
  if (spec.center_scale > 0.0) {
    centers = sample_gaussian(rng, components, spec.dims, {}, spec.center_scale);
  }
  Matrix points(spec.n, spec.dims);
  std::vector<int> labels(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::size_t component = i % components;
    for (std::size_t d = 0; d < spec.dims; ++d) {
      points(i, d) = centers(component, d) + spec.stddev * rng.normal();
    }
    labels[i] = spec.label_mode == LabelMode::by_cluster
                    ? static_cast<int>(component / spec.modes_per_class)
                    : static_cast<int>(rng.uniform_index(spec.classes));
  }
  return LabeledBatch(std::move(points), std::move(labels));
}

LabeledBatch gen_two_moons(Rng& rng, std::size_t n, double noise) {
  if (n < 4) throw Error(ErrorCode::invalid_input, "two moons needs at least 4 points");
  if (!(noise >= 0.0)) throw Error(ErrorCode::invalid_input, "noise must be non-negative");
  Matrix points(n, 2);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    const double angle = std::numbers::pi * rng.uniform();
    double x = label == 0 ? std::cos(angle) : 1.0 - std::cos(angle);
    double y = label == 0 ? std::sin(angle) : 0.5 - std::sin(angle);
    points(i, 0) = x + noise * rng.normal();
    points(i, 1) = y + noise * rng.normal();
    labels[i] = label;
  }
  for (std::size_t d = 0; d < 2; ++d) {
    double lo = points(0, d), hi = points(0, d);
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min(lo, points(i, d));
      hi = std::max(hi, points(i, d));
    }
    for (std::size_t i = 0; i < n; ++i) points(i, d) = (points(i, d) - lo) / (hi - lo);
  }
  return LabeledBatch(std::move(points), std::move(labels));
}

namespace {

std::optional<LabeledBatch> segment(const LabeledBatch& batch, std::span<const std::size_t> order,
                                    std::size_t begin, std::size_t count, const char* name) {
  if (count == 0) return std::nullopt;
  if (count < 2) {
    throw Error(ErrorCode::invalid_input,
                std::string("split leaves a single point in the ") + name + " segment");
  }
  return batch.subset(order.subspan(begin, count));
}

}  // namespace

Dataset split(const LabeledBatch& batch, SplitFractions fractions, Rng& rng) {
  const double parts[] = {fractions.train, fractions.test, fractions.holdout};
  for (double f : parts) {
    if (!(f >= 0.0) || !std::isfinite(f)) {
      throw Error(ErrorCode::invalid_input, "split fractions must be finite and non-negative");
    }
  }
  if (std::abs(fractions.train + fractions.test + fractions.holdout - 1.0) > 1e-9) {
    throw Error(ErrorCode::invalid_input, "split fractions must sum to 1");
  }
  if (fractions.train == 0.0) throw Error(ErrorCode::invalid_input, "train fraction must be positive");

  const std::size_t n = batch.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));

  const auto n_test = static_cast<std::size_t>(std::llround(fractions.test * static_cast<double>(n)));
  const auto n_holdout =
      static_cast<std::size_t>(std::llround(fractions.holdout * static_cast<double>(n)));
  if (n_test + n_holdout >= n) throw Error(ErrorCode::invalid_input, "split leaves no training points");
  const std::size_t n_train = n - n_test - n_holdout;

  auto train = segment(batch, order, 0, n_train, "train");
  if (!train) throw Error(ErrorCode::invalid_input, "split leaves no training points");
  Dataset out{*train, segment(batch, order, n_train, n_test, "test"),
              segment(batch, order, n_train + n_test, n_holdout, "holdout"), batch.class_count(),
              Provenance{"split", rng.seed(), "none"}};
  return out;
}

namespace {

struct RawIdx {
  std::uint8_t type = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;
  std::size_t count() const {
    std::size_t total = 1;
    for (auto d : dims) total *= d;
    return total;
  }
};

std::string hex32(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex;
  os.width(8);
  os.fill('0');
  os << v;
  return os.str();
}

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

std::size_t element_size(std::uint8_t type) {
  switch (type) {
    case 0x08: return 1;
    case 0x0E: return 8;
    default: return 0;
  }
}

RawIdx read_raw_idx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.filename().string();
  if (bytes.size() < 4) {
    throw Error(ErrorCode::parse_error, where + ": truncated header at offset 0");
  }
  const std::uint32_t magic = read_be32(bytes.data());
  RawIdx raw;
  raw.type = bytes[2];
  const std::size_t ndims = bytes[3];
  if (bytes[0] != 0 || bytes[1] != 0 || element_size(raw.type) == 0 || ndims == 0) {
    throw Error(ErrorCode::parse_error, where + ": bad magic number " + hex32(magic) + " at offset 0");
  }
  const std::size_t header = 4 + 4 * ndims;
  if (bytes.size() < header) {
    throw Error(ErrorCode::parse_error, where + ": truncated dimension header at offset 4");
  }
  for (std::size_t d = 0; d < ndims; ++d) raw.dims.push_back(read_be32(bytes.data() + 4 + 4 * d));
  const std::size_t expected = raw.count() * element_size(raw.type);
  if (bytes.size() - header < expected) {
    throw Error(ErrorCode::parse_error, where + ": truncated payload at offset " +
                                            std::to_string(header) + " (expected " +
                                            std::to_string(expected) + " bytes, found " +
                                            std::to_string(bytes.size() - header) + ")");
  }
  if (bytes.size() - header > expected) {
    throw Error(ErrorCode::parse_error, where + ": trailing bytes after offset " +
                                            std::to_string(header + expected));
  }
  raw.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return raw;
}

double element(const RawIdx& raw, std::size_t i) {
  if (raw.type == 0x08) return static_cast<double>(raw.payload[i]);
  std::uint64_t bits = 0;
  for (std::size_t b = 0; b < 8; ++b) bits = (bits << 8) | raw.payload[8 * i + b];
  return std::bit_cast<double>(bits);
}

void put_be32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(bytes, 4);
}

}  // namespace

IdxArray read_idx(const std::filesystem::path& path) {
  const RawIdx raw = read_raw_idx(path);
  IdxArray out;
  out.type = raw.type;
  out.dims = raw.dims;
  out.values.resize(raw.count());
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = element(raw, i);
  return out;
}

void write_idx(const std::filesystem::path& path, const IdxArray& array) {
  const std::size_t size = element_size(array.type);
  if (size == 0 || array.dims.empty() || array.dims.size() > 255) {
    throw Error(ErrorCode::invalid_input, "unsupported IDX type or rank");
  }
  std::size_t count = 1;
  for (auto d : array.dims) count *= d;
  if (count != array.values.size()) {
    throw Error(ErrorCode::invalid_input, "IDX dims do not match value count");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  put_be32(out, (std::uint32_t{array.type} << 8) | static_cast<std::uint32_t>(array.dims.size()));
  for (auto d : array.dims) put_be32(out, d);
  for (double v : array.values) {
    if (array.type == 0x08) {
      if (!(v >= 0.0 && v <= 255.0) || v != std::floor(v)) {
        throw Error(ErrorCode::invalid_input, "unsigned byte IDX values must be integers in [0, 255]");
      }
      out.put(static_cast<char>(static_cast<std::uint8_t>(v)));
    } else {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int b = 7; b >= 0; --b) out.put(static_cast<char>((bits >> (8 * b)) & 0xFF));
    }
  }
  if (!out) throw Error(ErrorCode::io_error, "failed writing " + path.string());
}

namespace {

Matrix image_rows(const RawIdx& images, std::span<const std::size_t> rows, const std::string& where) {
  const std::size_t per_row = images.count() / images.dims[0];
  Matrix out(rows.size(), per_row);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < per_row; ++c) {
      const double v = element(images, rows[r] * per_row + c);
      out(r, c) = images.type == 0x08 ? v / 255.0 : v;
      if (!(out(r, c) >= 0.0 && out(r, c) <= 1.0)) {
        throw Error(ErrorCode::parse_error, where + ": feature outside [0, 1] in row " +
                                                std::to_string(rows[r]));
      }
    }
  }
  return out;
}

void check_pair(const RawIdx& images, const RawIdx& labels, const std::string& image_name,
                const std::string& label_name) {
  if (images.dims.size() < 2) {
    throw Error(ErrorCode::parse_error, image_name + ": bad magic number, image files need rank >= 2 at offset 0");
  }
  if (labels.type != 0x08 || labels.dims.size() != 1) {
    throw Error(ErrorCode::parse_error, label_name + ": bad magic number, expected 0x00000801 at offset 0");
  }
  if (images.dims[0] != labels.dims[0]) {
    throw Error(ErrorCode::parse_error, "image count " + std::to_string(images.dims[0]) +
                                            " does not match label count " +
                                            std::to_string(labels.dims[0]));
  }
}

}  // namespace

LabeledBatch load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const RawIdx raw_images = read_raw_idx(images);
  const RawIdx raw_labels = read_raw_idx(labels);
  check_pair(raw_images, raw_labels, images.filename().string(), labels.filename().string());
  std::vector<std::size_t> rows(raw_images.dims[0]);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Matrix points = image_rows(raw_images, rows, images.filename().string());
  std::vector<int> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) y[i] = raw_labels.payload[i];
  return LabeledBatch(std::move(points), std::move(y));
}

void save_idx(const LabeledBatch& batch, const std::filesystem::path& images,
              const std::filesystem::path& labels, std::span<const std::uint32_t> image_shape) {
  IdxArray features;
  features.type = 0x0E;
  features.dims.push_back(static_cast<std::uint32_t>(batch.size()));
  if (image_shape.empty()) {
    features.dims.push_back(static_cast<std::uint32_t>(batch.dims()));
  } else {
    std::size_t total = 1;
    for (auto d : image_shape) total *= d;
    if (total != batch.dims()) throw Error(ErrorCode::invalid_input, "image shape does not match dims");
    features.dims.insert(features.dims.end(), image_shape.begin(), image_shape.end());
  }
  features.values.assign(batch.points().values().begin(), batch.points().values().end());
  write_idx(images, features);

  IdxArray label_array;
  label_array.type = 0x08;
  label_array.dims = {static_cast<std::uint32_t>(batch.size())};
  for (int label : batch.labels()) {
    if (label > 255) throw Error(ErrorCode::invalid_input, "labels above 255 do not fit IDX bytes");
    label_array.values.push_back(label);
  }
  write_idx(labels, label_array);
}

LabeledBatch shuffle_pixels(const LabeledBatch& batch, Rng& rng) {
  Matrix points = batch.points();
  for (std::size_t i = 0; i < points.rows(); ++i) rng.shuffle(points.row(i));
  return batch.with_points(std::move(points));
}

Dataset mnist_subset(const MnistSubsetSpec& spec) {
  if (!(spec.holdout_fraction >= 0.0 && spec.holdout_fraction < 1.0)) {
    throw Error(ErrorCode::invalid_input, "holdout_fraction must lie in [0, 1)");
  }
  const auto& dir = spec.directory;
  const RawIdx train_images = read_raw_idx(dir / "train-images-idx3-ubyte");
  const RawIdx train_labels = read_raw_idx(dir / "train-labels-idx1-ubyte");
  const RawIdx test_images = read_raw_idx(dir / "t10k-images-idx3-ubyte");
  const RawIdx test_labels = read_raw_idx(dir / "t10k-labels-idx1-ubyte");
  check_pair(train_images, train_labels, "train-images-idx3-ubyte", "train-labels-idx1-ubyte");
  check_pair(test_images, test_labels, "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte");
  if (spec.train > train_images.dims[0] || spec.test > test_images.dims[0] || spec.train < 4) {
    throw Error(ErrorCode::invalid_input, "requested MNIST subset is larger than the files");
  }

  auto draw = [](const RawIdx& images, const RawIdx& labels, std::size_t count, std::uint64_t seed) {
    std::vector<std::size_t> order(images.dims[0]);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    order.resize(count);
    Matrix points = image_rows(images, order, "mnist");
    std::vector<int> y(count);
    for (std::size_t i = 0; i < count; ++i) y[i] = labels.payload[order[i]];
    return LabeledBatch(std::move(points), std::move(y));
  };

  const LabeledBatch pool = draw(train_images, train_labels, spec.train, derive_seed(spec.seed, 1));
  const auto n_holdout = static_cast<std::size_t>(
      std::llround(spec.holdout_fraction * static_cast<double>(spec.train)));
  std::vector<std::size_t> train_rows(spec.train - n_holdout), holdout_rows(n_holdout);
  std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
  std::iota(holdout_rows.begin(), holdout_rows.end(), spec.train - n_holdout);

  Dataset out{pool.subset(train_rows), std::nullopt, std::nullopt, 10,
              Provenance{"mnist:" + dir.string(), spec.seed, "divide by 255"}};
  if (spec.test >= 2) out.test = draw(test_images, test_labels, spec.test, derive_seed(spec.seed, 2));
  if (n_holdout >= 2) out.holdout = pool.subset(holdout_rows);
  return out;
}

std::optional<std::filesystem::path> find_mnist_dir(const std::filesystem::path& hint) {
  auto usable = [](const std::filesystem::path& dir) {
    return !dir.empty() && std::filesystem::exists(dir / "train-images-idx3-ubyte") &&
           std::filesystem::exists(dir / "t10k-images-idx3-ubyte");
  };
  if (usable(hint)) return hint;
  if (const char* env = std::getenv("SNNLAB_MNIST_DIR"); env && usable(env)) {
    return std::filesystem::path(env);
  }
  if (usable("data/mnist")) return std::filesystem::path("data/mnist");
  return std::nullopt;
}

}  // namespace snnlab
