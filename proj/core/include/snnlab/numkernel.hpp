#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "snnlab/matrix.hpp"

namespace snnlab {

enum class Metric { euclidean, cosine };

std::string_view to_string(Metric metric) noexcept;
Metric parse_metric(std::string_view name);

/// D[i][j] = sum_d (X[i][d] - X[j][d])^2, accumulated in dimension order.
DistanceMatrix pairwise_sq_euclidean(const Matrix& x);

/// D[i][j] = 1 - cos(x_i, x_j). Throws ZeroVector for a zero-norm row.
DistanceMatrix pairwise_cosine_distance(const Matrix& x);

DistanceMatrix pairwise_distance(const Matrix& x, Metric metric);

/// Per-row L2 norms; throws ZeroVector when any row has zero norm.
std::vector<double> row_norms_nonzero(const Matrix& x);

/// Mask entry 1 keeps a value in the reduction, 0 drops it.
using Mask = std::vector<std::uint8_t>;

/// log(sum_i exp(v_i)) over unmasked entries, shifted by the unmasked maximum.
double logsumexp(std::span<const double> values, std::span<const std::uint8_t> mask);
double logsumexp(std::span<const double> values);

/// xoshiro256** seeded through splitmix64. The stream is fixed by the seed on
/// every platform; normals use Box-Muller on top of uniform() so they are too.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t draws() const noexcept { return draws_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform integer in [0, n). Requires n > 0.
  std::size_t uniform_index(std::size_t n);
  double normal() noexcept;

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_[4];
  std::uint64_t draws_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// n x dims matrix of N(mean, stddev^2) draws. An empty mean means zeros.
Matrix sample_gaussian(Rng& rng, std::size_t n, std::size_t dims, std::span<const double> mean,
                       double stddev);

}  // namespace snnlab

namespace snnlab {

/// Independent sub-stream seed for a named consumer of a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace snnlab
