#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snnlab/matrix.hpp"
#include "snnlab/numkernel.hpp"
#include "snnlab/snn_loss.hpp"

namespace snnlab {

enum class LabelMode { by_cluster, random };

struct BlobSpec {
  std::size_t n = 200;
  std::size_t classes = 4;
  std::size_t modes_per_class = 1;
  std::size_t dims = 2;
  double stddev = 1.0;
  /// Component centers are drawn from N(0, center_scale^2); 0 puts every
  /// component at the origin.
  double center_scale = 0.0;
  LabelMode label_mode = LabelMode::random;
};

/// Points are assigned to mixture components round-robin. With by_cluster
/// there are classes * modes_per_class components and component c carries
/// label c / modes_per_class; with random there are modes_per_class
/// components and every label is drawn uniformly.
LabeledBatch gen_gaussian_blobs(Rng& rng, const BlobSpec& spec);

/// Two interleaving half circles with Gaussian noise, min-max scaled to [0, 1].
LabeledBatch gen_two_moons(Rng& rng, std::size_t n, double noise);

struct Provenance {
  std::string source;
  std::uint64_t seed = 0;
  std::string normalization;
};

struct Dataset {
  LabeledBatch train;
  std::optional<LabeledBatch> test;
  std::optional<LabeledBatch> holdout;
  std::size_t classes = 0;
  Provenance provenance;
};

struct SplitFractions {
  double train = 1.0;
  double test = 0.0;
  double holdout = 0.0;
};

/// Seeded shuffle, then contiguous train | test | holdout segments.
Dataset split(const LabeledBatch& batch, SplitFractions fractions, Rng& rng);

/// Raw IDX container: big-endian header, then the payload.
struct IdxArray {
  std::uint8_t type = 0x08;  ///< 0x08 unsigned byte, 0x0E float64
  std::vector<std::uint32_t> dims;
  std::vector<double> values;  ///< payload converted to double, unscaled
};

IdxArray read_idx(const std::filesystem::path& path);
void write_idx(const std::filesystem::path& path, const IdxArray& array);

/// Images (0x00000803, or float64 0x00000E03 / 0x00000E02 written by this
/// library) and labels (0x00000801). Byte pixels are divided by 255.
LabeledBatch load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Writes features as a float64 IDX file with shape (rows, cols) or
/// (rows, image_rows, image_cols), and labels as an unsigned byte IDX file.
void save_idx(const LabeledBatch& batch, const std::filesystem::path& images,
              const std::filesystem::path& labels, std::span<const std::uint32_t> image_shape = {});

/// Every row's pixels permuted independently; a stand-in out-of-distribution set.
LabeledBatch shuffle_pixels(const LabeledBatch& batch, Rng& rng);

struct MnistSubsetSpec {
  std::filesystem::path directory;
  std::size_t train = 10000;  ///< drawn from the training file, holdout included
  std::size_t test = 2000;    ///< drawn from the test file
  double holdout_fraction = 0.1;
  std::uint64_t seed = 0;
};

/// Seeded subsets of the four standard MNIST IDX files. The last
/// holdout_fraction of the drawn training points forms the holdout split.
Dataset mnist_subset(const MnistSubsetSpec& spec);

/// Locates the MNIST directory: explicit path, then $SNNLAB_MNIST_DIR, then data/mnist.
std::optional<std::filesystem::path> find_mnist_dir(const std::filesystem::path& hint = {});

}  // namespace snnlab
