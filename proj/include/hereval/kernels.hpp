// include/hereval/kernels.hpp

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

#pragma once

// Data-parallel inner loops. Every kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::omp with identical
// results: the parallel versions split only over independent outer indices
// and keep every reduction in serial order, so outputs are bit-identical.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hereval/metrics.hpp"

namespace hereval::kernels {

using TokenList = std::vector<std::string>;

/// Seed for bootstrap iteration `iteration`, derived from the run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t iteration);

namespace serial {

std::vector<metrics::AlignmentResult> batch_align(std::span<const TokenList> refs,
                                                  std::span<const TokenList> hyps);

/// Column means of a row-major rows x dim matrix.
std::vector<double> column_means(std::span<const float> data, std::size_t rows, std::size_t dim);

/// Per-column central moment E[(x - mean)^order].
std::vector<double> column_central_moments(std::span<const float> data, std::size_t rows,
                                           std::size_t dim, std::span<const double> means, int order);

/// Mean of `scores` under `iterations` resamples with replacement.
std::vector<double> bootstrap_means(std::span<const double> scores, std::size_t iterations,
                                    std::uint64_t seed);

/// First x.size() samples of the full linear convolution x * ir.
std::vector<double> convolve_head(std::span<const float> x, std::span<const float> ir);

}  // namespace serial

namespace omp {

std::vector<metrics::AlignmentResult> batch_align(std::span<const TokenList> refs,
                                                  std::span<const TokenList> hyps);
std::vector<double> column_means(std::span<const float> data, std::size_t rows, std::size_t dim);
std::vector<double> column_central_moments(std::span<const float> data, std::size_t rows,
                                           std::size_t dim, std::span<const double> means, int order);
std::vector<double> bootstrap_means(std::span<const double> scores, std::size_t iterations,
                                    std::uint64_t seed);
std::vector<double> convolve_head(std::span<const float> x, std::span<const float> ir);

/// Threads OpenMP will use; 1 when built without OpenMP.
int max_threads();

}  // namespace omp

}  // namespace hereval::kernels
