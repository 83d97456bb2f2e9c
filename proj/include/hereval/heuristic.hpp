// include/hereval/heuristic.hpp

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

#include <optional>

namespace hereval::heuristic {

enum class Combinator { All, Any };

/// Thresholds for the cosine / WER / perplexity baseline detector.
struct Thresholds {
  double cosine_max = 0.2;
  double wer_min = 30.0;
  double perplexity_max = 200.0;
  Combinator combinator = Combinator::All;

  void validate() const;
};

/// Cosine similarity and perplexity come from an external provider.
struct Inputs {
  std::optional<double> wer;
  std::optional<double> cosine_similarity;
  std::optional<double> perplexity;
};

enum class Verdict { Hallucination, NotHallucination };

/// Predicates (all strict): wer > wer_min, cosine < cosine_max,
/// perplexity < perplexity_max. Throws ValidationError if any input is absent.
Verdict classify(const Inputs& inputs, const Thresholds& thresholds = {});

}  // namespace hereval::heuristic
