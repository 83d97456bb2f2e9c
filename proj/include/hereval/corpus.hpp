// include/hereval/corpus.hpp

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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hereval/heuristic.hpp"
#include "hereval/judge.hpp"
#include "hereval/taxonomy.hpp"

namespace hereval::corpus {

/// One (reference, hypothesis) pair. Text is stored orthographically; every
/// metric normalizes on the fly.
struct EvalSample {
  std::string id;
  std::string dataset;
  std::string model;
  std::string reference;
  std::string hypothesis;
  std::optional<std::string> audio_path;
  std::optional<double> cos_sim;
  std::optional<double> ppl;
  // Fixture labels replayed by the offline mock judge.
  std::optional<std::string> mock_coarse;
  std::optional<std::string> mock_fine;
  std::optional<int> mock_confidence;
};

/// Parse a JSONL manifest. Blank lines are skipped. All problems (malformed
/// JSON, missing or empty required fields, duplicate ids) are collected and
/// thrown together as one ValidationError naming each line.
std::vector<EvalSample> load_manifest(const std::filesystem::path& path);
std::vector<EvalSample> parse_manifest(std::string_view text, const std::string& source_name = "<manifest>");
std::string to_jsonl(const EvalSample& sample);
void write_manifest(const std::filesystem::path& path, std::span<const EvalSample> samples);

inline constexpr std::size_t kDefaultSampleSize = 1000;

/// Uniform sample without replacement, deterministic per seed, input order
/// preserved. n larger than the input is an error.
std::vector<EvalSample> sample_n(std::span<const EvalSample> samples, std::size_t n = kDefaultSampleSize,
                                 std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Label files

std::string to_jsonl(const ErrorLabel& label);
void write_labels(const std::filesystem::path& path, std::span<const ErrorLabel> labels);
std::vector<ErrorLabel> parse_labels(std::string_view text, const std::string& source_name = "<labels>");
std::vector<ErrorLabel> load_labels(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Human annotation set

struct AnnotationParams {
  std::size_t n_total = 500;
  std::size_t n_synthetic = 50;
  std::vector<std::string> annotators = default_annotators(20);
  double wer_threshold = 60.0;
  std::size_t min_words = 1;
  std::size_t max_words = 100;
  std::uint64_t seed = 0;

  static std::vector<std::string> default_annotators(std::size_t n);
};

struct AnnotationTask {
  std::string task_id;
  std::string sample_id;             // sample the reference comes from
  std::string hypothesis_source_id;  // differs from sample_id for synthetic tasks
  std::string reference;             // orthographic, as shown to annotators
  std::string hypothesis;
  std::string reference_normalized;
  std::string hypothesis_normalized;
  double wer = 0.0;  // of the originating sample
  bool is_synthetic = false;
  std::array<std::string, 2> annotators;
};

/// Number of whitespace-separated words as shown to an annotator.
std::size_t word_count(std::string_view text);

/// Real tasks come from samples with WER > threshold and both texts within
/// the word bounds; synthetic tasks pair references with hypotheses shuffled
/// across other samples, never their own. Each task gets two distinct
/// annotators with per-annotator loads differing by at most one.
std::vector<AnnotationTask> build_annotation_set(std::span<const EvalSample> pool, const AnnotationParams& params);

std::string to_jsonl(const AnnotationTask& task);
void write_tasks(const std::filesystem::path& path, std::span<const AnnotationTask> tasks);
std::vector<AnnotationTask> load_tasks(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Evaluation runs

enum class Status { Ok, Unclassified, Skipped };

struct SampleRecord {
  std::string id;
  std::string dataset;
  std::string model;
  std::string reference;   // normalized
  std::string hypothesis;  // normalized
  std::size_t ref_words = 0;
  std::size_t ref_chars = 0;
  std::size_t word_edits = 0;
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t char_edits = 0;
  double wer = 0.0;
  double cer = 0.0;
  Status coarse_status = Status::Skipped;
  Status fine_status = Status::Skipped;
  std::optional<std::string> coarse_label;
  std::optional<std::string> fine_label;
  std::optional<int> coarse_confidence;
  std::optional<int> fine_confidence;
  std::optional<bool> heuristic_hallucination;
};

struct ReportRow {
  std::string model;
  std::string dataset;
  std::size_t n = 0;
  std::size_t word_edits = 0;
  std::size_t ref_words = 0;
  std::size_t char_edits = 0;
  std::size_t ref_chars = 0;
  std::size_t judged_coarse = 0;
  std::size_t he_coarse = 0;
  std::size_t judged_fine = 0;
  std::size_t he_fine = 0;
  std::size_t unclassified_coarse = 0;
  std::size_t unclassified_fine = 0;

  double wer() const;
  double cer() const;
  std::optional<double> her_coarse() const;
  std::optional<double> her_fine() const;
  /// HER (as a percentage) over WER; absent when WER is 0 or HER unknown.
  std::optional<double> her_wer_ratio() const;
  std::size_t unclassified_count() const { return unclassified_coarse + unclassified_fine; }
};

/// Count-weighted aggregation per (model, dataset), sorted by model then
/// dataset.
std::vector<ReportRow> aggregate(std::span<const SampleRecord> records);

struct EvaluateOptions {
  bool judge_coarse = false;
  bool judge_fine = false;
  bool with_confidence = false;
  judge::JudgeConfig judge_config;
  judge::ChatBackend* backend = nullptr;
  judge::JudgeCache* cache = nullptr;
  heuristic::Thresholds heuristic;
  UtcTime timestamp{};
};

struct RunResult {
  std::vector<SampleRecord> records;
  std::vector<ReportRow> rows;
  std::vector<ErrorLabel> labels;
};

/// Normalize, score WER/CER, optionally judge at either granularity, and run
/// the heuristic for samples that carry cos_sim and ppl.
RunResult evaluate(std::span<const EvalSample> samples, const EvaluateOptions& options);

/// Register every fixture label carried by the samples with a mock backend.
void register_mock_labels(judge::MockBackend& backend, std::span<const EvalSample> samples);

/// Write runs/<run_id>/{report.csv, labels.jsonl, samples.jsonl, meta.json}
/// through a temporary directory renamed into place, and update
/// runs/index.json.
std::filesystem::path write_run(const std::filesystem::path& runs_dir, const std::string& run_id,
                                const RunResult& result, const std::string& meta_json);

std::string to_jsonl(const SampleRecord& record);
std::vector<SampleRecord> load_sample_records(const std::filesystem::path& path);

/// Sample records from every run under runs_dir, in run-id order.
std::vector<SampleRecord> load_runs(const std::filesystem::path& runs_dir);

std::string report_csv(std::span<const ReportRow> rows);
/// Flat table plus model x dataset pivots of "WER/HER" and HER/WER ratio.
std::string report_markdown(std::span<const ReportRow> rows);
std::string report_json(std::span<const ReportRow> rows);

/// Write via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace hereval::corpus
