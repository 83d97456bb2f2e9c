// bench/bench_kernels.cpp

// Copyright 2026  hereval authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Serial reference versus OpenMP kernels on synthetic inputs.

#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "hereval/kernels.hpp"

using namespace hereval::kernels;

namespace {

std::vector<TokenList> token_lists(std::size_t n, std::size_t len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TokenList> out(n);
  for (auto& l : out) {
    const std::size_t k = 1 + rng() % len;
    for (std::size_t i = 0; i < k; ++i) l.push_back("w" + std::to_string(rng() % 50));
  }
  return out;
}

std::vector<float> matrix(std::size_t rows, std::size_t dim) {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> g;
  std::vector<float> m(rows * dim);
  for (auto& x : m) x = g(rng);
  return m;
}

template <bool Parallel>
void BM_BatchAlign(benchmark::State& state) {
  const auto refs = token_lists(static_cast<std::size_t>(state.range(0)), 40, 1);
  const auto hyps = token_lists(refs.size(), 40, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? omp::batch_align(refs, hyps) : serial::batch_align(refs, hyps));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_ColumnMeans(benchmark::State& state) {
  const std::size_t rows = static_cast<std::size_t>(state.range(0)), dim = 768;
  const auto m = matrix(rows, dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? omp::column_means(m, rows, dim) : serial::column_means(m, rows, dim));
  }
}

template <bool Parallel>
void BM_CentralMoments(benchmark::State& state) {
  const std::size_t rows = static_cast<std::size_t>(state.range(0)), dim = 768;
  const auto m = matrix(rows, dim);
  const auto means = serial::column_means(m, rows, dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? omp::column_central_moments(m, rows, dim, means, 3)
                                      : serial::column_central_moments(m, rows, dim, means, 3));
  }
}

template <bool Parallel>
void BM_Bootstrap(benchmark::State& state) {
  std::vector<double> scores(500);
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = i % 3 == 0;
  const auto iters = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? omp::bootstrap_means(scores, iters, 7)
                                      : serial::bootstrap_means(scores, iters, 7));
  }
}

template <bool Parallel>
void BM_Convolve(benchmark::State& state) {
  const auto x = matrix(16000, 1);
  const auto ir = matrix(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? omp::convolve_head(x, ir) : serial::convolve_head(x, ir));
  }
}

}  // namespace

BENCHMARK(BM_BatchAlign<false>)->Name("batch_align/serial")->Arg(1000)->Arg(10000);
BENCHMARK(BM_BatchAlign<true>)->Name("batch_align/omp")->Arg(1000)->Arg(10000)->UseRealTime();
BENCHMARK(BM_ColumnMeans<false>)->Name("column_means/serial")->Arg(1000)->Arg(10000);
BENCHMARK(BM_ColumnMeans<true>)->Name("column_means/omp")->Arg(1000)->Arg(10000)->UseRealTime();
BENCHMARK(BM_CentralMoments<false>)->Name("central_moments/serial")->Arg(1000)->Arg(10000);
BENCHMARK(BM_CentralMoments<true>)->Name("central_moments/omp")->Arg(1000)->Arg(10000)->UseRealTime();
BENCHMARK(BM_Bootstrap<false>)->Name("bootstrap/serial")->Arg(1000)->Arg(10000);
BENCHMARK(BM_Bootstrap<true>)->Name("bootstrap/omp")->Arg(1000)->Arg(10000)->UseRealTime();
BENCHMARK(BM_Convolve<false>)->Name("convolve_head/serial")->Arg(256)->Arg(2048);
BENCHMARK(BM_Convolve<true>)->Name("convolve_head/omp")->Arg(256)->Arg(2048)->UseRealTime();

BENCHMARK_MAIN();
