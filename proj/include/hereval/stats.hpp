// include/hereval/stats.hpp

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

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hereval::stats {

// ---------------------------------------------------------------------------
// Agreement

struct AgreementResult {
  std::string rater_a;
  std::string rater_b;
  double raw_agreement = 0.0;
  double std = 0.0;  // bootstrap standard deviation
  std::size_t n = 0;
};

inline constexpr std::size_t kDefaultBootstrapIters = 1000;

/// Exact-match proportion over position-aligned label lists, with the
/// standard deviation of that proportion over seeded bootstrap resamples.
AgreementResult raw_agreement(std::span<const std::string> a, std::span<const std::string> b,
                              std::size_t bootstrap_iters = kDefaultBootstrapIters,
                              std::uint64_t seed = 0);

/// A label keyed by sample and rater.
struct RatedLabel {
  std::string sample_id;
  std::string rater;
  std::string label;
};

/// Join two label sets by sample id. Each rater set may hold several labels
/// per sample (two human annotators); per-sample agreement is the mean match
/// rate over all cross pairs and the result averages it over samples.
/// Throws ValidationError when the sample id sets differ.
AgreementResult grouped_agreement(const std::vector<RatedLabel>& a, const std::vector<RatedLabel>& b,
                                  std::size_t bootstrap_iters = kDefaultBootstrapIters,
                                  std::uint64_t seed = 0);

struct HumanAgreement {
  /// Pooled over every sample with at least two annotators.
  AgreementResult micro;
  /// Mean over annotators of each annotator's agreement with co-annotators.
  double per_annotator_mean = 0.0;
  std::map<std::string, double> per_annotator;
};

/// Human-human agreement from a label set with two (or more) raters per sample.
HumanAgreement human_human_agreement(const std::vector<RatedLabel>& labels,
                                     std::size_t bootstrap_iters = kDefaultBootstrapIters,
                                     std::uint64_t seed = 0);

/// Population standard deviation.
double stddev(std::span<const double> values);

// ---------------------------------------------------------------------------
// Verbalized confidence

/// Linear interpolation between order statistics (q in [0, 100]).
double percentile(std::vector<double> values, double q);

struct ClassConfidence {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double p1 = 0.0, p5 = 0.0, p10 = 0.0, p25 = 0.0;
};

struct ConfidenceSummary {
  /// Only classes with at least one confidence appear.
  std::map<std::string, ClassConfidence> per_class;
  /// Unweighted mean across present classes, statistic by statistic.
  ClassConfidence overall;
};

struct LabelConfidence {
  std::string label;
  int confidence = 0;
};

ConfidenceSummary confidence_summary(std::span<const LabelConfidence> items);

/// Markdown laid out with metrics as rows and classes as columns.
std::string to_markdown(const ConfidenceSummary& summary,
                        const std::map<std::string, std::string>& abbreviations = {});

// ---------------------------------------------------------------------------
// Normalization transitions

struct Transition {
  std::string from;
  std::string to;
  std::size_t count = 0;
};

struct TransitionMatrix {
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  std::size_t total = 0;
  std::size_t matches = 0;

  double overall_agreement() const {
    return total == 0 ? 1.0 : static_cast<double>(matches) / static_cast<double>(total);
  }
  /// Off-diagonal cells as (from, to, count), sorted by from then to.
  std::vector<Transition> off_diagonal() const;
};

/// Labels keyed by sample id under two conditions (normalized vs
/// orthographic). Sample id sets must coincide.
TransitionMatrix transition_matrix(const std::map<std::string, std::string>& normalized,
                                   const std::map<std::string, std::string>& orthographic);

std::string to_markdown(const TransitionMatrix& m,
                        const std::map<std::string, std::string>& abbreviations = {});

// ---------------------------------------------------------------------------
// Cost model

struct CostModel {
  double tokens_in_per_example = 1000;
  double tokens_out_per_example = 5;
  double price_in_per_million = 0.075;
  double price_out_per_million = 0.600;
  double human_minutes_per_50 = 10;
  double human_hourly_rate = 10;

  void validate() const;
};

struct CostEstimate {
  double llm_input_cost = 0.0;
  double llm_output_cost = 0.0;
  double llm_cost = 0.0;
  double human_minutes = 0.0;
  double human_cost = 0.0;
  /// human_cost / llm_cost; +inf when LLM cost is zero but human cost is not,
  /// NaN when both are zero.
  double ratio = 0.0;
};

CostEstimate estimate_cost(double n_segments, const CostModel& model = {});

}  // namespace hereval::stats
