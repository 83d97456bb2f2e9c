// src/heuristic.cpp

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

#include "hereval/heuristic.hpp"

#include <cmath>
#include <string>

#include "hereval/error.hpp"

namespace hereval::heuristic {

void Thresholds::validate() const {
  if (!(cosine_max >= -1.0 && cosine_max <= 1.0)) {
    throw ValidationError("heuristic: cosine threshold must lie in [-1, 1]");
  }
  if (!(wer_min >= 0.0)) throw ValidationError("heuristic: WER threshold must be >= 0");
  if (!(perplexity_max > 0.0)) throw ValidationError("heuristic: perplexity threshold must be > 0");
}

Verdict classify(const Inputs& inputs, const Thresholds& thresholds) {
  if (!inputs.wer) throw ValidationError("heuristic: missing wer");
  if (!inputs.cosine_similarity) throw ValidationError("heuristic: missing cos_sim");
  if (!inputs.perplexity) throw ValidationError("heuristic: missing ppl");
  if (*inputs.cosine_similarity < -1.0 || *inputs.cosine_similarity > 1.0) {
    throw ValidationError("heuristic: cos_sim outside [-1, 1]");
  }
  if (!(*inputs.perplexity > 0.0)) throw ValidationError("heuristic: ppl must be positive");

  const bool high_wer = *inputs.wer > thresholds.wer_min;
  const bool low_cos = *inputs.cosine_similarity < thresholds.cosine_max;
  const bool low_ppl = *inputs.perplexity < thresholds.perplexity_max;
  const bool hit = thresholds.combinator == Combinator::All ? (high_wer && low_cos && low_ppl)
                                                            : (high_wer || low_cos || low_ppl);
  return hit ? Verdict::Hallucination : Verdict::NotHallucination;
}

}  // namespace hereval::heuristic
