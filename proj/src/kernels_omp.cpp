// src/kernels_omp.cpp

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

#include <cmath>
#include <random>

#include "hereval/error.hpp"
#include "hereval/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hereval::kernels::omp {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<metrics::AlignmentResult> batch_align(std::span<const TokenList> refs,
                                                  std::span<const TokenList> hyps) {
  if (refs.size() != hyps.size()) throw ValidationError("batch_align: size mismatch");
  std::vector<metrics::AlignmentResult> out(refs.size());
  const auto n = static_cast<std::int64_t>(refs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = metrics::align<std::string>(refs[i], hyps[i]);
  }
  return out;
}

std::vector<double> column_means(std::span<const float> data, std::size_t rows, std::size_t dim) {
  std::vector<double> mean(dim, 0.0);
  if (rows == 0) return mean;
  const auto d = static_cast<std::int64_t>(dim);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < d; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < rows; ++r) s += data[r * dim + c];
    mean[c] = s / static_cast<double>(rows);
  }
  return mean;
}

std::vector<double> column_central_moments(std::span<const float> data, std::size_t rows,
                                           std::size_t dim, std::span<const double> means, int order) {
  std::vector<double> out(dim, 0.0);
  if (rows == 0) return out;
  const auto d = static_cast<std::int64_t>(dim);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < d; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < rows; ++r) s += std::pow(data[r * dim + c] - means[c], order);
    out[c] = s / static_cast<double>(rows);
  }
  return out;
}

std::vector<double> bootstrap_means(std::span<const double> scores, std::size_t iterations,
                                    std::uint64_t seed) {
  std::vector<double> out(iterations, 0.0);
  if (scores.empty()) return out;
  const auto iters = static_cast<std::int64_t>(iterations);
#pragma omp parallel for schedule(static)
  for (std::int64_t it = 0; it < iters; ++it) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(it)));
    std::uniform_int_distribution<std::size_t> pick(0, scores.size() - 1);
    double s = 0.0;
    for (std::size_t k = 0; k < scores.size(); ++k) s += scores[pick(rng)];
    out[it] = s / static_cast<double>(scores.size());
  }
  return out;
}

std::vector<double> convolve_head(std::span<const float> x, std::span<const float> ir) {
  std::vector<double> y(x.size(), 0.0);
  const auto n_out = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < n_out; ++n) {
    double acc = 0.0;
    const std::size_t kmax = std::min(static_cast<std::size_t>(n) + 1, ir.size());
    for (std::size_t k = 0; k < kmax; ++k) acc += static_cast<double>(ir[k]) * x[n - k];
    y[n] = acc;
  }
  return y;
}

}  // namespace hereval::kernels::omp
