// src/taxonomy.cpp

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

#include "hereval/taxonomy.hpp"

#include <cstdio>
#include <ctime>

namespace hereval {

std::string_view to_string(CoarseLabel label) {
  switch (label) {
    case CoarseLabel::HallucinationError: return "Hallucination Error";
    case CoarseLabel::NonHallucinationError: return "Non-Hallucination Error";
    case CoarseLabel::NoError: return "No Error";
  }
  return "";
}

std::string_view to_string(FineLabel label) {
  switch (label) {
    case FineLabel::HallucinationError: return "Hallucination Error";
    case FineLabel::LanguageError: return "Language Error";
    case FineLabel::OscillationError: return "Oscillation Error";
    case FineLabel::PhoneticError: return "Phonetic Error";
    case FineLabel::NoError: return "No Error";
  }
  return "";
}

std::string_view to_string(Granularity granularity) {
  return granularity == Granularity::Coarse ? "coarse" : "fine";
}

std::string_view to_string(LabelSource source) {
  switch (source) {
    case LabelSource::Llm: return "llm";
    case LabelSource::Human: return "human";
    case LabelSource::Heuristic: return "heuristic";
  }
  return "";
}

std::optional<CoarseLabel> parse_coarse(std::string_view text) {
  for (CoarseLabel l : kCoarseLabels) {
    if (to_string(l) == text) return l;
  }
  return std::nullopt;
}

std::optional<FineLabel> parse_fine(std::string_view text) {
  for (FineLabel l : kFineLabels) {
    if (to_string(l) == text) return l;
  }
  return std::nullopt;
}

std::optional<Granularity> parse_granularity(std::string_view text) {
  if (text == "coarse") return Granularity::Coarse;
  if (text == "fine") return Granularity::Fine;
  return std::nullopt;
}

std::optional<LabelSource> parse_source(std::string_view text) {
  if (text == "llm") return LabelSource::Llm;
  if (text == "human") return LabelSource::Human;
  if (text == "heuristic") return LabelSource::Heuristic;
  return std::nullopt;
}

CoarseLabel project_fine_to_coarse(FineLabel label) {
  switch (label) {
    case FineLabel::HallucinationError: return CoarseLabel::HallucinationError;
    case FineLabel::NoError: return CoarseLabel::NoError;
    case FineLabel::LanguageError:
    case FineLabel::OscillationError:
    case FineLabel::PhoneticError:
      return CoarseLabel::NonHallucinationError;
  }
  return CoarseLabel::NonHallucinationError;
}

Granularity granularity_of(const AnyLabel& label) {
  return std::holds_alternative<CoarseLabel>(label) ? Granularity::Coarse : Granularity::Fine;
}

std::string_view label_string(const AnyLabel& label) {
  return std::visit([](auto l) { return to_string(l); }, label);
}

CoarseLabel to_coarse(const AnyLabel& label) {
  if (const auto* c = std::get_if<CoarseLabel>(&label)) return *c;
  return project_fine_to_coarse(std::get<FineLabel>(label));
}

bool is_hallucination(const AnyLabel& label) {
  return to_coarse(label) == CoarseLabel::HallucinationError;
}

std::optional<AnyLabel> parse_label(std::string_view text, Granularity granularity) {
  if (granularity == Granularity::Coarse) {
    if (auto c = parse_coarse(text)) return AnyLabel{*c};
  } else {
    if (auto f = parse_fine(text)) return AnyLabel{*f};
  }
  return std::nullopt;
}

std::string format_rfc3339(UtcTime t) {
  const std::time_t tt = t.time_since_epoch().count();
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<UtcTime> parse_rfc3339(std::string_view text) {
  int y, mo, d, h, mi, s;
  char tail = 0;
  const std::string str(text);
  if (std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &s, &tail) != 7 ||
      tail != 'Z') {
    return std::nullopt;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

}  // namespace hereval
