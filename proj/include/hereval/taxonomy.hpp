// include/hereval/taxonomy.hpp

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

#include <array>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace hereval {

enum class Granularity { Coarse, Fine };

enum class CoarseLabel { HallucinationError, NonHallucinationError, NoError };

enum class FineLabel {
  HallucinationError,
  LanguageError,
  OscillationError,
  PhoneticError,
  NoError,
};

enum class LabelSource { Llm, Human, Heuristic };

inline constexpr std::array<CoarseLabel, 3> kCoarseLabels = {
    CoarseLabel::HallucinationError, CoarseLabel::NonHallucinationError, CoarseLabel::NoError};
inline constexpr std::array<FineLabel, 5> kFineLabels = {
    FineLabel::HallucinationError, FineLabel::LanguageError, FineLabel::OscillationError,
    FineLabel::PhoneticError, FineLabel::NoError};

// Wire strings. These are byte-exact in every JSONL file and HTTP payload.
std::string_view to_string(CoarseLabel label);
std::string_view to_string(FineLabel label);
std::string_view to_string(Granularity granularity);
std::string_view to_string(LabelSource source);

std::optional<CoarseLabel> parse_coarse(std::string_view text);
std::optional<FineLabel> parse_fine(std::string_view text);
std::optional<Granularity> parse_granularity(std::string_view text);
std::optional<LabelSource> parse_source(std::string_view text);

/// Language, oscillation and phonetic errors collapse to Non-Hallucination.
CoarseLabel project_fine_to_coarse(FineLabel label);

using AnyLabel = std::variant<CoarseLabel, FineLabel>;

Granularity granularity_of(const AnyLabel& label);
std::string_view label_string(const AnyLabel& label);
CoarseLabel to_coarse(const AnyLabel& label);
bool is_hallucination(const AnyLabel& label);

/// Parse a wire string under the given granularity.
std::optional<AnyLabel> parse_label(std::string_view text, Granularity granularity);

using UtcTime = std::chrono::sys_seconds;

std::string format_rfc3339(UtcTime t);
std::optional<UtcTime> parse_rfc3339(std::string_view text);

struct ErrorLabel {
  std::string sample_id;
  AnyLabel label = CoarseLabel::NoError;
  LabelSource source = LabelSource::Llm;
  std::optional<int> confidence;  // 1..10
  std::optional<std::string> judge_model;
  std::optional<std::string> annotator_id;
  UtcTime timestamp{};

  Granularity granularity() const { return granularity_of(label); }
};

}  // namespace hereval
