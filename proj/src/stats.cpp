// src/stats.cpp

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

#include "hereval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "hereval/error.hpp"
#include "hereval/kernels.hpp"

namespace hereval::stats {
namespace {

double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

AgreementResult from_scores(std::span<const double> scores, std::size_t iters, std::uint64_t seed) {
  AgreementResult r;
  r.n = scores.size();
  r.raw_agreement = mean_of(scores);
  if (iters > 0) {
    const auto boot = kernels::omp::bootstrap_means(scores, iters, seed);
    r.std = stddev(boot);
  }
  return r;
}

std::string abbreviate(const std::string& label, const std::map<std::string, std::string>& abbrev) {
  const auto it = abbrev.find(label);
  return it == abbrev.end() ? label : it->second;
}

}  // namespace

double stddev(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double m = mean_of(values);
  double s = 0.0;
  for (double v : values) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(values.size()));
}

AgreementResult raw_agreement(std::span<const std::string> a, std::span<const std::string> b,
                              std::size_t bootstrap_iters, std::uint64_t seed) {
  if (a.size() != b.size()) {
    throw ValidationError(fmt::format("raw_agreement: lists differ in length ({} vs {})", a.size(), b.size()));
  }
  if (a.empty()) throw ValidationError("raw_agreement: no labels");
  std::vector<double> scores(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) scores[i] = a[i] == b[i] ? 1.0 : 0.0;
  return from_scores(scores, bootstrap_iters, seed);
}

AgreementResult grouped_agreement(const std::vector<RatedLabel>& a, const std::vector<RatedLabel>& b,
                                  std::size_t bootstrap_iters, std::uint64_t seed) {
  std::map<std::string, std::vector<std::string>> ga, gb;
  for (const auto& l : a) ga[l.sample_id].push_back(l.label);
  for (const auto& l : b) gb[l.sample_id].push_back(l.label);
  if (ga.empty()) throw ValidationError("agreement: no labels");

  std::vector<std::string> missing;
  for (const auto& [id, _] : ga) {
    if (!gb.count(id)) missing.push_back(id);
  }
  for (const auto& [id, _] : gb) {
    if (!ga.count(id)) missing.push_back(id);
  }
  if (!missing.empty()) {
    std::string msg = fmt::format("agreement: {} sample id(s) not present in both label sets:", missing.size());
    for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 10); ++i) msg += " " + missing[i];
    throw ValidationError(msg);
  }

  std::vector<double> scores;
  scores.reserve(ga.size());
  for (const auto& [id, la] : ga) {
    const auto& lb = gb.at(id);
    double match = 0.0;
    for (const auto& x : la) {
      for (const auto& y : lb) match += x == y ? 1.0 : 0.0;
    }
    scores.push_back(match / static_cast<double>(la.size() * lb.size()));
  }
  auto r = from_scores(scores, bootstrap_iters, seed);
  if (!a.empty()) r.rater_a = a.front().rater;
  if (!b.empty()) r.rater_b = b.front().rater;
  return r;
}

HumanAgreement human_human_agreement(const std::vector<RatedLabel>& labels, std::size_t bootstrap_iters,
                                     std::uint64_t seed) {
  std::map<std::string, std::vector<const RatedLabel*>> by_sample;
  for (const auto& l : labels) by_sample[l.sample_id].push_back(&l);

  std::vector<double> scores;
  std::map<std::string, std::pair<double, std::size_t>> annotator_totals;
  for (const auto& [id, group] : by_sample) {
    if (group.size() < 2) continue;
    double match = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < group.size(); ++i) {
      for (std::size_t j = i + 1; j < group.size(); ++j) {
        const double m = group[i]->label == group[j]->label ? 1.0 : 0.0;
        match += m;
        ++pairs;
        for (const RatedLabel* who : {group[i], group[j]}) {
          auto& t = annotator_totals[who->rater];
          t.first += m;
          t.second += 1;
        }
      }
    }
    scores.push_back(match / static_cast<double>(pairs));
  }
  if (scores.empty()) throw ValidationError("human agreement: no sample has two annotators");

  HumanAgreement h;
  h.micro = from_scores(scores, bootstrap_iters, seed);
  h.micro.rater_a = "human";
  h.micro.rater_b = "human";
  double sum = 0.0;
  for (const auto& [who, t] : annotator_totals) {
    h.per_annotator[who] = t.first / static_cast<double>(t.second);
    sum += h.per_annotator[who];
  }
  h.per_annotator_mean = sum / static_cast<double>(h.per_annotator.size());
  return h;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("percentile: no values");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

ConfidenceSummary confidence_summary(std::span<const LabelConfidence> items) {
  std::map<std::string, std::vector<double>> groups;
  for (const auto& it : items) {
    if (it.confidence < 1 || it.confidence > 10) {
      throw ValidationError(fmt::format("confidence {} outside 1..10", it.confidence));
    }
    groups[it.label].push_back(it.confidence);
  }
  ConfidenceSummary s;
  for (auto& [label, v] : groups) {
    ClassConfidence c;
    c.n = v.size();
    c.mean = mean_of(v);
    c.median = percentile(v, 50);
    c.p1 = percentile(v, 1);
    c.p5 = percentile(v, 5);
    c.p10 = percentile(v, 10);
    c.p25 = percentile(v, 25);
    s.per_class[label] = c;
  }
  if (!s.per_class.empty()) {
    const double k = static_cast<double>(s.per_class.size());
    for (const auto& [label, c] : s.per_class) {
      s.overall.n += c.n;
      s.overall.mean += c.mean / k;
      s.overall.median += c.median / k;
      s.overall.p1 += c.p1 / k;
      s.overall.p5 += c.p5 / k;
      s.overall.p10 += c.p10 / k;
      s.overall.p25 += c.p25 / k;
    }
  }
  return s;
}

std::string to_markdown(const ConfidenceSummary& summary, const std::map<std::string, std::string>& abbreviations) {
  std::string out = "| Metric |";
  std::string rule = "|---|";
  for (const auto& [label, _] : summary.per_class) {
    out += " " + abbreviate(label, abbreviations) + " |";
    rule += "---|";
  }
  out += " Overall |\n" + rule + "---|\n";
  const std::pair<const char*, double ClassConfidence::*> rows[] = {
      {"Mean", &ClassConfidence::mean}, {"Median", &ClassConfidence::median}, {"1%ile", &ClassConfidence::p1},
      {"5%ile", &ClassConfidence::p5},  {"10%ile", &ClassConfidence::p10},    {"25%ile", &ClassConfidence::p25}};
  for (const auto& [name, field] : rows) {
    out += fmt::format("| {} |", name);
    for (const auto& [label, c] : summary.per_class) out += fmt::format(" {:.2f} |", c.*field);
    out += fmt::format(" {:.2f} |\n", summary.overall.*field);
  }
  return out;
}

std::vector<Transition> TransitionMatrix::off_diagonal() const {
  std::vector<Transition> out;
  for (const auto& [from, row] : counts) {
    for (const auto& [to, n] : row) {
      if (from != to && n > 0) out.push_back({from, to, n});
    }
  }
  return out;
}

TransitionMatrix transition_matrix(const std::map<std::string, std::string>& normalized,
                                   const std::map<std::string, std::string>& orthographic) {
  if (normalized.size() != orthographic.size()) {
    throw ValidationError(fmt::format("transition_matrix: {} normalized vs {} orthographic labels",
                                      normalized.size(), orthographic.size()));
  }
  TransitionMatrix m;
  for (const auto& [id, from] : normalized) {
    const auto it = orthographic.find(id);
    if (it == orthographic.end()) throw ValidationError("transition_matrix: sample '" + id + "' not aligned");
    ++m.counts[from][it->second];
    ++m.total;
    if (from == it->second) ++m.matches;
  }
  return m;
}

std::string to_markdown(const TransitionMatrix& m, const std::map<std::string, std::string>& abbreviations) {
  std::string out = "| From (Normalized) | To (Orthographic) | Count |\n|---|---|---|\n";
  for (const auto& t : m.off_diagonal()) {
    out += fmt::format("| {} | {} | {} |\n", abbreviate(t.from, abbreviations), abbreviate(t.to, abbreviations),
                       t.count);
  }
  out += fmt::format("\nOverall agreement: {:.4f} ({}/{})\n", m.overall_agreement(), m.matches, m.total);
  return out;
}

void CostModel::validate() const {
  for (double v : {tokens_in_per_example, tokens_out_per_example, price_in_per_million, price_out_per_million,
                   human_minutes_per_50, human_hourly_rate}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("cost model parameters must be finite and >= 0");
  }
}

CostEstimate estimate_cost(double n_segments, const CostModel& model) {
  if (!(n_segments >= 0.0)) throw ValidationError("estimate_cost: segment count must be >= 0");
  model.validate();
  CostEstimate c;
  c.llm_input_cost = n_segments * model.tokens_in_per_example / 1e6 * model.price_in_per_million;
  c.llm_output_cost = n_segments * model.tokens_out_per_example / 1e6 * model.price_out_per_million;
  c.llm_cost = c.llm_input_cost + c.llm_output_cost;
  c.human_minutes = n_segments * model.human_minutes_per_50 / 50.0;
  c.human_cost = c.human_minutes / 60.0 * model.human_hourly_rate;
  if (c.llm_cost > 0.0) {
    c.ratio = c.human_cost / c.llm_cost;
  } else {
    c.ratio = c.human_cost > 0.0 ? std::numeric_limits<double>::infinity()
                                 : std::numeric_limits<double>::quiet_NaN();
  }
  return c;
}

}  // namespace hereval::stats
