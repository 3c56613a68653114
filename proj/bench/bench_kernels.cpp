// Serial reference vs OpenMP kernels. Thread count follows ANOMA_THREADS /
// OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include <vector>

#include "anoma/kernels.hpp"
#include "anoma/parallel.hpp"
#include "anoma/rng.hpp"

namespace {

using namespace anoma;

std::vector<float> random_floats(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform01());
  return v;
}

constexpr std::size_t kDim = 16;

template <bool Parallel>
void BM_NearestDistances(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto queries = random_floats(n * kDim, 1);
  const auto bank = random_floats(n * kDim / 4, 2);
  std::vector<float> out(n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::nearest_distances(queries, bank, kDim, out);
    } else {
      kernels::serial::nearest_distances(queries, bank, kDim, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool Parallel>
void BM_Mahalanobis(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_floats(n * kDim, 3);
  const auto mean = random_floats(n * kDim, 4);
  std::vector<double> chol(n * kDim * kDim, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t i = 0; i < kDim; ++i) chol[p * kDim * kDim + i * kDim + i] = 1.0 + 0.01 * static_cast<double>(i);
  }
  std::vector<float> out(n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::mahalanobis(x, mean, chol, kDim, out);
    } else {
      kernels::serial::mahalanobis(x, mean, chol, kDim, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool Parallel>
void BM_Conv3x3(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t k = 8;
  const auto image = random_floats(size * size, 5);
  const auto filters = random_floats(k * 9, 6);
  std::vector<float> out((size - 2) * (size - 2) * k);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::conv3x3_relu(image, size, size, 1, filters, k, out);
    } else {
      kernels::serial::conv3x3_relu(image, size, size, 1, filters, k, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_Blur(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const auto src = random_floats(size * size, 7);
  std::vector<double> kernel(17, 1.0 / 17.0);
  std::vector<float> out(size * size);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::blur_separable(src, size, size, kernel, out);
    } else {
      kernels::serial::blur_separable(src, size, size, kernel, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_PatchStats(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const auto image = random_floats(size * size * 3, 8);
  constexpr std::size_t cell = 8;
  std::vector<float> out((size / cell) * (size / cell) * 12);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::patch_stats(image, size, size, 3, cell, out);
    } else {
      kernels::serial::patch_stats(image, size, size, 3, cell, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_NearestDistances<false>)->Arg(1024)->Arg(4096);
BENCHMARK(BM_NearestDistances<true>)->Arg(1024)->Arg(4096);
BENCHMARK(BM_Mahalanobis<false>)->Arg(4096);
BENCHMARK(BM_Mahalanobis<true>)->Arg(4096);
BENCHMARK(BM_Conv3x3<false>)->Arg(128)->Arg(256);
BENCHMARK(BM_Conv3x3<true>)->Arg(128)->Arg(256);
BENCHMARK(BM_Blur<false>)->Arg(256)->Arg(512);
BENCHMARK(BM_Blur<true>)->Arg(256)->Arg(512);
BENCHMARK(BM_PatchStats<false>)->Arg(256);
BENCHMARK(BM_PatchStats<true>)->Arg(256);

int main(int argc, char** argv) {
  anoma::apply_thread_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
