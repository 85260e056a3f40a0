#include <benchmark/benchmark.h>

#include <vector>

#include "dhan/graph.hpp"
#include "dhan/kernels.hpp"
#include "dhan/rng.hpp"

namespace {

namespace k = dhan::kernels;

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  dhan::Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = dhan::standard_normal(rng);
  return v;
}

dhan::CsrAdjacency random_adjacency(std::size_t n, std::size_t degree, std::uint64_t seed) {
  dhan::Rng rng(seed);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < degree; ++d)
      pairs.emplace_back(i, static_cast<std::uint32_t>(dhan::uniform_index(rng, n)));
  return dhan::CsrAdjacency::from_pairs(n, std::move(pairs));
}

template <bool Parallel>
void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t h = 128;
  const auto a = random_values(n * h, 1), b = random_values(h * h, 2);
  std::vector<double> c(n * h);
  for (auto _ : state) {
    if constexpr (Parallel)
      k::omp::gemm(n, h, h, a, b, c);
    else
      k::serial::gemm(n, h, h, a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * h * h));
}

template <bool Parallel>
void BM_Spmm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t h = 128;
  const auto adj = random_adjacency(n, 16, 3);
  const auto w = random_values(adj.num_edges(), 4), x = random_values(n * h, 5);
  std::vector<double> y(n * h);
  for (auto _ : state) {
    if constexpr (Parallel)
      k::omp::spmm(adj.row_offsets, adj.col_indices, w, x, h, y);
    else
      k::serial::spmm(adj.row_offsets, adj.col_indices, w, x, h, y);
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Parallel>
void BM_SegmentSoftmax(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto adj = random_adjacency(n, 16, 6);
  const auto x = random_values(adj.num_edges(), 7);
  std::vector<double> y(adj.num_edges());
  for (auto _ : state) {
    if constexpr (Parallel)
      k::omp::segment_softmax(adj.row_offsets, x, y);
    else
      k::serial::segment_softmax(adj.row_offsets, x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Parallel>
void BM_LayerNorm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t h = 128;
  const auto x = random_values(n * h, 8);
  const std::vector<double> gain(h, 1.0), bias(h, 0.0);
  std::vector<double> y(n * h), mean(n), rstd(n);
  for (auto _ : state) {
    if constexpr (Parallel)
      k::omp::layer_norm(n, h, x, gain, bias, 1e-5, y, mean, rstd);
    else
      k::serial::layer_norm(n, h, x, gain, bias, 1e-5, y, mean, rstd);
    benchmark::DoNotOptimize(y.data());
  }
}

BENCHMARK(BM_Gemm<false>)->Arg(600)->Arg(4800);
BENCHMARK(BM_Gemm<true>)->Arg(600)->Arg(4800);
BENCHMARK(BM_Spmm<false>)->Arg(600)->Arg(4800);
BENCHMARK(BM_Spmm<true>)->Arg(600)->Arg(4800);
BENCHMARK(BM_SegmentSoftmax<false>)->Arg(4800)->Arg(38400);
BENCHMARK(BM_SegmentSoftmax<true>)->Arg(4800)->Arg(38400);
BENCHMARK(BM_LayerNorm<false>)->Arg(600)->Arg(4800);
BENCHMARK(BM_LayerNorm<true>)->Arg(600)->Arg(4800);

}  // namespace

BENCHMARK_MAIN();
