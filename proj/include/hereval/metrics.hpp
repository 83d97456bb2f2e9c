// include/hereval/metrics.hpp

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

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hereval/taxonomy.hpp"
#include "hereval/textnorm.hpp"

namespace hereval::metrics {

struct AlignmentResult {
  std::size_t distance = 0;
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t ref_len = 0;
  std::size_t hyp_len = 0;

  bool operator==(const AlignmentResult&) const = default;
};

/// Levenshtein alignment with unit costs. The backtrace prefers
/// match/substitution, then insertion, then deletion; only the S/I/D split
/// depends on that order, never the distance.
template <typename T>
AlignmentResult align(std::span<const T> ref, std::span<const T> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  const std::size_t cols = m + 1;
  std::vector<std::size_t> d((n + 1) * cols);
  for (std::size_t j = 0; j <= m; ++j) d[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    d[i * cols] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = d[(i - 1) * cols + j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const std::size_t ins = d[i * cols + j - 1] + 1;
      const std::size_t del = d[(i - 1) * cols + j] + 1;
      d[i * cols + j] = std::min({sub, ins, del});
    }
  }

  AlignmentResult r;
  r.ref_len = n;
  r.hyp_len = m;
  r.distance = d[n * cols + m];
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const std::size_t here = d[i * cols + j];
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (here == d[(i - 1) * cols + j - 1] + (same ? 0 : 1)) {
        if (!same) ++r.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (j > 0 && here == d[i * cols + j - 1] + 1) {
      ++r.insertions;
      --j;
    } else {
      ++r.deletions;
      --i;
    }
  }
  return r;
}

/// Distance only, two-row DP. Used by the batch kernels and the hot path.
template <typename T>
std::size_t edit_distance(std::span<const T> ref, std::span<const T> hyp) {
  std::vector<std::size_t> prev(hyp.size() + 1), cur(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      cur[j] = std::min({prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1), cur[j - 1] + 1, prev[j] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[hyp.size()];
}

struct WerResult {
  double wer = 0.0;  // percentage
  AlignmentResult alignment;
};

/// 100 * word edits / reference words. Throws ValidationError on an empty
/// reference.
WerResult word_error_rate(const textnorm::NormalizedText& reference,
                          const textnorm::NormalizedText& hypothesis);

/// Character alignment over the joined strings, spaces included.
AlignmentResult char_alignment(const textnorm::NormalizedText& reference,
                               const textnorm::NormalizedText& hypothesis);

/// 100 * character edits / reference characters (code points).
double char_error_rate(const textnorm::NormalizedText& reference,
                       const textnorm::NormalizedText& hypothesis);

/// Fraction of labels that are Hallucination Error. Empty input throws.
double her(std::span<const CoarseLabel> labels);
double her(std::span<const FineLabel> labels);
double her(std::span<const AnyLabel> labels);

// Degradation from a source domain to a target domain.
inline double werd(double wer_source, double wer_target) { return wer_target - wer_source; }
inline double herd(double her_source, double her_target) { return her_target - her_source; }

struct RateRecord {
  double wer = 0.0;
  double cer = 0.0;
  std::optional<double> her;
};

struct DegradationRecord {
  std::string source_domain;
  std::string target_domain;
  double werd = 0.0;
  double herd = 0.0;
};

DegradationRecord degradation(std::string source_domain, const RateRecord& source,
                              std::string target_domain, const RateRecord& target);

}  // namespace hereval::metrics
