// Microbenchmarks for the kernels that dominate training and DkNN time.
//
//   ./snnlab_bench --benchmark_filter=Snn

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "snnlab/dknn.hpp"
#include "snnlab/mlp.hpp"
#include "snnlab/numkernel.hpp"
#include "snnlab/objective.hpp"
#include "snnlab/snn_loss.hpp"

using namespace snnlab;

namespace {

Matrix relu_points(std::size_t n, std::size_t dims, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x = sample_gaussian(rng, n, dims, {}, 1.0);
  for (double& v : x.values()) v = v > 0.0 ? v : 0.0;
  return x;
}

std::vector<int> labels(std::size_t n, int classes, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> y(n);
  for (int& v : y) v = static_cast<int>(rng.uniform_index(classes));
  return y;
}

}  // namespace

static void BM_PairwiseSqEuclidean(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = relu_points(n, static_cast<std::size_t>(state.range(1)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_sq_euclidean(x));
}
BENCHMARK(BM_PairwiseSqEuclidean)->Args({64, 64})->Args({256, 128})->Args({256, 256});

static void BM_PairwiseCosine(benchmark::State& state) {
  const Matrix x = relu_points(static_cast<std::size_t>(state.range(0)), 256, 2);
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_cosine_distance(x));
}
BENCHMARK(BM_PairwiseCosine)->Arg(64)->Arg(256);

static void BM_SnnLoss(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DistanceMatrix d = pairwise_sq_euclidean(relu_points(n, 128, 3));
  const std::vector<int> y = labels(n, 10, 4);
  const Temperature t = Temperature::from_value(100.0);
  for (auto _ : state) benchmark::DoNotOptimize(snn_loss(d, y, t));
}
BENCHMARK(BM_SnnLoss)->Arg(64)->Arg(256);

static void BM_SnnLossGrad(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = relu_points(n, 128, 5);
  const DistanceMatrix d = pairwise_sq_euclidean(x);
  const std::vector<int> y = labels(n, 10, 6);
  const Temperature t = Temperature::from_value(100.0);
  for (auto _ : state) benchmark::DoNotOptimize(snn_loss_grad(x, y, d, t, Metric::euclidean));
}
BENCHMARK(BM_SnnLossGrad)->Arg(64)->Arg(256);

static void BM_OptimizedTemperature(benchmark::State& state) {
  const DistanceMatrix d = pairwise_sq_euclidean(relu_points(128, 128, 7));
  const std::vector<int> y = labels(128, 10, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimized_snn_loss(d, y, Temperature::from_value(100.0), 25, 0.1));
  }
}
BENCHMARK(BM_OptimizedTemperature);

// Forward pass plus composite step of the MNIST network at batch 256;
// alpha 0 is plain cross-entropy, alpha -1 adds both hidden SNN terms.
static void BM_CompositeStep(benchmark::State& state) {
  const MlpSpec spec{{784, 256, 128, 10}};
  Rng rng(9);
  const Params p = Params::initialize(spec, rng);
  const Matrix x = relu_points(256, 784, 10);
  const std::vector<int> y = labels(256, 10, 11);
  const CompositeLossConfig cfg = CompositeLossConfig::for_spec(spec, static_cast<double>(state.range(0)));
  auto temps = cfg.initial_temperatures();
  for (auto _ : state) {
    const ForwardTrace trace = forward(p, x);
    benchmark::DoNotOptimize(composite_step(p, trace, y, cfg, temps));
  }
}
BENCHMARK(BM_CompositeStep)->Arg(0)->Arg(-1)->Unit(benchmark::kMillisecond);

// k-nearest training neighbors in every layer for 256 queries.
static void BM_DknnNeighbors(benchmark::State& state) {
  const MlpSpec spec{{64, 128, 64, 10}};
  Rng rng(12);
  const Params p = Params::initialize(spec, rng);
  const auto n = static_cast<std::size_t>(state.range(0));
  const LabeledBatch train(relu_points(n, 64, 13), labels(n, 10, 14));
  DknnConfig cfg;
  cfg.k = 10;
  const DknnIndex index = DknnIndex::build(p, train, cfg);
  const ForwardTrace queries = forward(p, relu_points(256, 64, 15));
  for (auto _ : state) benchmark::DoNotOptimize(index.neighbors(queries));
}
BENCHMARK(BM_DknnNeighbors)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
