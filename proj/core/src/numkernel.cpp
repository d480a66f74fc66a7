#include "snnlab/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "snnlab/error.hpp"

namespace snnlab {

std::string_view to_string(Metric metric) noexcept {
  return metric == Metric::cosine ? "cosine" : "euclidean";
}

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::euclidean;
  if (name == "cosine") return Metric::cosine;
  throw Error(ErrorCode::invalid_input, "unknown metric '" + std::string(name) + "'");
}

namespace {

void require_points(const Matrix& x) {
  if (x.rows() == 0 || x.cols() == 0) {
    throw Error(ErrorCode::invalid_input, "point matrix must have at least one row and column");
  }
  if (!x.all_finite()) {
    throw Error(ErrorCode::invalid_input, "point matrix contains non-finite values");
  }
}

}  // namespace

DistanceMatrix pairwise_sq_euclidean(const Matrix& x) {
  require_points(x);
  const std::size_t n = x.rows();
  const std::size_t dims = x.cols();

  // Dimension-major copy so the inner loop runs over j with one accumulator
  // per pair; each pair still sums its squared differences in dimension order.
  std::vector<double> transposed(n * dims);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dims; ++d) transposed[d * n + i] = x(i, d);
  }

  // Rows are handled in blocks of four so each column strip is read from
  // cache once per block instead of once per row.
  constexpr std::size_t kBlock = 4;
  Matrix out(n, n);
  std::vector<double> acc(kBlock * n);
  for (std::size_t i0 = 0; i0 < n; i0 += kBlock) {
    const std::size_t rows = std::min(kBlock, n - i0);
    const std::size_t width = n - i0 - 1;
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t d = 0; d < dims; ++d) {
      const double* col = transposed.data() + d * n + i0 + 1;
      for (std::size_t r = 0; r < rows; ++r) {
        const double xi = x(i0 + r, d);
        double* a = acc.data() + r * n;
        for (std::size_t j = r; j < width; ++j) {
          const double diff = xi - col[j];
          a[j] += diff * diff;
        }
      }
    }
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t i = i0 + r;
      const double* a = acc.data() + r * n;
      for (std::size_t j = r; j < width; ++j) {
        out(i, i0 + 1 + j) = a[j];
        out(i0 + 1 + j, i) = a[j];
      }
    }
  }
  return DistanceMatrix(std::move(out));
}

std::vector<double> row_norms_nonzero(const Matrix& x) {
  std::vector<double> norms(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (double v : x.row(i)) s += v * v;
    if (s == 0.0) {
      throw Error(ErrorCode::zero_vector, "row " + std::to_string(i) + " has zero norm");
    }
    norms[i] = std::sqrt(s);
  }
  return norms;
}

DistanceMatrix pairwise_cosine_distance(const Matrix& x) {
  require_points(x);
  const std::size_t n = x.rows();
  const std::vector<double> norms = row_norms_nonzero(x);

  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto xi = x.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      auto xj = x.row(j);
      double dot = 0.0;
      for (std::size_t d = 0; d < x.cols(); ++d) dot += xi[d] * xj[d];
      double cos = dot / (norms[i] * norms[j]);
      cos = std::clamp(cos, -1.0, 1.0);
      out(i, j) = 1.0 - cos;
      out(j, i) = out(i, j);
    }
  }
  return DistanceMatrix(std::move(out));
}

DistanceMatrix pairwise_distance(const Matrix& x, Metric metric) {
  return metric == Metric::cosine ? pairwise_cosine_distance(x) : pairwise_sq_euclidean(x);
}

double logsumexp(std::span<const double> values, std::span<const std::uint8_t> mask) {
  if (mask.size() != values.size()) {
    throw Error(ErrorCode::invalid_input, "mask length does not match value count");
  }
  double top = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mask[i] && values[i] > top) top = values[i];
    any = any || mask[i];
  }
  if (!any) {
    throw Error(ErrorCode::empty_reduction, "logsumexp over an empty set");
  }
  if (std::isinf(top)) return top;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mask[i]) sum += std::exp(values[i] - top);
  }
  return top + std::log(sum);
}

double logsumexp(std::span<const double> values) {
  const Mask all(values.size(), 1);
  return logsumexp(values, all);
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t s = seed;
  for (auto& word : state_) word = splitmix64(s);
}

std::uint64_t Rng::next_u64() noexcept {
  ++draws_;
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::invalid_input, "uniform_index over an empty range");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r = next_u64();
  while (r >= limit) r = next_u64();
  return static_cast<std::size_t>(r % bound);
}

double Rng::normal() noexcept {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

Matrix sample_gaussian(Rng& rng, std::size_t n, std::size_t dims, std::span<const double> mean,
                       double stddev) {
  if (!(stddev > 0.0) || !std::isfinite(stddev)) {
    throw Error(ErrorCode::invalid_input, "stddev must be positive");
  }
  if (n == 0 || dims == 0) {
    throw Error(ErrorCode::invalid_input, "sample shape must be non-empty");
  }
  if (!mean.empty() && mean.size() != dims) {
    throw Error(ErrorCode::invalid_input, "mean length does not match dims");
  }
  Matrix out(n, dims);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dims; ++d) {
      out(i, d) = (mean.empty() ? 0.0 : mean[d]) + stddev * rng.normal();
    }
  }
  return out;
}

}  // namespace snnlab

namespace snnlab {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
  return splitmix64(s);
}

}  // namespace snnlab
