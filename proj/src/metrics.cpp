// src/metrics.cpp

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

#include "hereval/metrics.hpp"

#include "hereval/error.hpp"

namespace hereval::metrics {

WerResult word_error_rate(const textnorm::NormalizedText& reference,
                          const textnorm::NormalizedText& hypothesis) {
  if (reference.tokens.empty()) {
    throw ValidationError("word_error_rate: reference has no words");
  }
  WerResult r;
  r.alignment = align<std::string>(reference.tokens, hypothesis.tokens);
  r.wer = 100.0 * static_cast<double>(r.alignment.distance) / static_cast<double>(reference.tokens.size());
  return r;
}

AlignmentResult char_alignment(const textnorm::NormalizedText& reference,
                               const textnorm::NormalizedText& hypothesis) {
  const std::u32string ref = textnorm::decode_utf8(reference.joined);
  const std::u32string hyp = textnorm::decode_utf8(hypothesis.joined);
  return align<char32_t>(ref, hyp);
}

double char_error_rate(const textnorm::NormalizedText& reference,
                       const textnorm::NormalizedText& hypothesis) {
  if (reference.joined.empty()) {
    throw ValidationError("char_error_rate: reference is empty");
  }
  const AlignmentResult a = char_alignment(reference, hypothesis);
  return 100.0 * static_cast<double>(a.distance) / static_cast<double>(a.ref_len);
}

namespace {

template <typename L>
double her_impl(std::span<const L> labels) {
  if (labels.empty()) throw ValidationError("her: no labels");
  std::size_t count = 0;
  for (const L& l : labels) {
    if (is_hallucination(AnyLabel{l})) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(labels.size());
}

}  // namespace

double her(std::span<const CoarseLabel> labels) { return her_impl(labels); }
double her(std::span<const FineLabel> labels) { return her_impl(labels); }

double her(std::span<const AnyLabel> labels) {
  if (labels.empty()) throw ValidationError("her: no labels");
  std::size_t count = 0;
  for (const AnyLabel& l : labels) {
    if (is_hallucination(l)) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(labels.size());
}

DegradationRecord degradation(std::string source_domain, const RateRecord& source,
                              std::string target_domain, const RateRecord& target) {
  if (!source.her || !target.her) {
    throw ValidationError("degradation: HER missing for " + (source.her ? target_domain : source_domain));
  }
  DegradationRecord d;
  d.source_domain = std::move(source_domain);
  d.target_domain = std::move(target_domain);
  d.werd = werd(source.wer, target.wer);
  d.herd = herd(*source.her, *target.her);
  return d;
}

}  // namespace hereval::metrics
