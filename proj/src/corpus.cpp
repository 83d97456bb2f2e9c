// src/corpus.cpp

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

#include "hereval/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hereval/error.hpp"
#include "hereval/kernels.hpp"
#include "hereval/metrics.hpp"
#include "hereval/textnorm.hpp"

namespace hereval::corpus {
namespace {

using ojson = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename F>
void for_each_line(std::string_view text, F&& f) {
  std::size_t lineno = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++lineno;
    f(lineno, line);
    pos = end + 1;
  }
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

void throw_collected(const std::string& source, const std::vector<std::string>& problems) {
  std::string msg = fmt::format("{}: {} problem(s)", source, problems.size());
  for (const auto& p : problems) msg += "\n  " + p;
  throw ValidationError(msg);
}

template <typename T>
std::optional<T> opt_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

template <typename T>
void put_opt(ojson& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

std::string_view status_string(Status s) {
  switch (s) {
    case Status::Ok: return "ok";
    case Status::Unclassified: return "unclassified";
    case Status::Skipped: return "skipped";
  }
  return "";
}

Status parse_status(std::string_view s) {
  if (s == "ok") return Status::Ok;
  if (s == "unclassified") return Status::Unclassified;
  if (s == "skipped") return Status::Skipped;
  throw ValidationError("unknown status '" + std::string(s) + "'");
}

std::string num(double v, int decimals) { return fmt::format("{:.{}f}", v, decimals); }

std::string opt_num(const std::optional<double>& v, int decimals) { return v ? num(*v, decimals) : ""; }

}  // namespace

// ---------------------------------------------------------------------------
// Manifests

std::vector<EvalSample> parse_manifest(std::string_view text, const std::string& source_name) {
  std::vector<EvalSample> out;
  std::vector<std::string> problems;
  std::map<std::string, std::size_t> seen;
  for_each_line(text, [&](std::size_t lineno, std::string_view line) {
    if (blank(line)) return;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      problems.push_back(fmt::format("line {}: malformed JSON", lineno));
      return;
    }
    if (!j.is_object()) {
      problems.push_back(fmt::format("line {}: not a JSON object", lineno));
      return;
    }
    std::vector<std::string> missing;
    for (const char* key : {"id", "dataset", "model", "reference", "hypothesis"}) {
      if (!j.contains(key) || !j[key].is_string()) missing.emplace_back(key);
    }
    if (!missing.empty()) {
      std::string names;
      for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
      problems.push_back(fmt::format("line {}: missing required field(s) {}", lineno, names));
      return;
    }
    try {
      EvalSample s;
      s.id = j["id"].get<std::string>();
      s.dataset = j["dataset"].get<std::string>();
      s.model = j["model"].get<std::string>();
      s.reference = j["reference"].get<std::string>();
      s.hypothesis = j["hypothesis"].get<std::string>();
      s.audio_path = opt_field<std::string>(j, "audio_path");
      s.cos_sim = opt_field<double>(j, "cos_sim");
      s.ppl = opt_field<double>(j, "ppl");
      s.mock_coarse = opt_field<std::string>(j, "mock_coarse");
      s.mock_fine = opt_field<std::string>(j, "mock_fine");
      s.mock_confidence = opt_field<int>(j, "mock_confidence");
      if (s.id.empty()) {
        problems.push_back(fmt::format("line {}: empty id", lineno));
        return;
      }
      if (s.reference.empty()) {
        problems.push_back(fmt::format("line {}: empty reference", lineno));
        return;
      }
      if (s.mock_coarse && !parse_coarse(*s.mock_coarse)) {
        problems.push_back(fmt::format("line {}: mock_coarse '{}' is not a coarse label", lineno, *s.mock_coarse));
        return;
      }
      if (s.mock_fine && !parse_fine(*s.mock_fine)) {
        problems.push_back(fmt::format("line {}: mock_fine '{}' is not a fine label", lineno, *s.mock_fine));
        return;
      }
      if (const auto [it, fresh] = seen.emplace(s.id, lineno); !fresh) {
        problems.push_back(fmt::format("line {}: duplicate id '{}' (first on line {})", lineno, s.id, it->second));
        return;
      }
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      problems.push_back(fmt::format("line {}: bad field type ({})", lineno, e.what()));
    }
  });
  if (!problems.empty()) throw_collected(source_name, problems);
  return out;
}

std::vector<EvalSample> load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path), path.string());
}

std::string to_jsonl(const EvalSample& s) {
  ojson j;
  j["id"] = s.id;
  j["dataset"] = s.dataset;
  j["model"] = s.model;
  j["reference"] = s.reference;
  j["hypothesis"] = s.hypothesis;
  put_opt(j, "audio_path", s.audio_path);
  put_opt(j, "cos_sim", s.cos_sim);
  put_opt(j, "ppl", s.ppl);
  put_opt(j, "mock_coarse", s.mock_coarse);
  put_opt(j, "mock_fine", s.mock_fine);
  put_opt(j, "mock_confidence", s.mock_confidence);
  return j.dump();
}

void write_manifest(const std::filesystem::path& path, std::span<const EvalSample> samples) {
  std::string out;
  for (const auto& s : samples) out += to_jsonl(s) + "\n";
  write_file_atomic(path, out);
}

std::vector<EvalSample> sample_n(std::span<const EvalSample> samples, std::size_t n, std::uint64_t seed) {
  if (n > samples.size()) {
    throw ValidationError(fmt::format("sample_n: requested {} samples but only {} available", n, samples.size()));
  }
  std::vector<EvalSample> out;
  out.reserve(n);
  std::mt19937_64 rng(seed);
  std::sample(samples.begin(), samples.end(), std::back_inserter(out), n, rng);
  return out;
}

// ---------------------------------------------------------------------------
// Labels

std::string to_jsonl(const ErrorLabel& l) {
  ojson j;
  j["sample_id"] = l.sample_id;
  j["granularity"] = std::string(to_string(l.granularity()));
  j["label"] = std::string(label_string(l.label));
  j["source"] = std::string(to_string(l.source));
  put_opt(j, "confidence", l.confidence);
  put_opt(j, "judge_model", l.judge_model);
  put_opt(j, "annotator_id", l.annotator_id);
  j["timestamp"] = format_rfc3339(l.timestamp);
  return j.dump();
}

void write_labels(const std::filesystem::path& path, std::span<const ErrorLabel> labels) {
  std::string out;
  for (const auto& l : labels) out += to_jsonl(l) + "\n";
  write_file_atomic(path, out);
}

std::vector<ErrorLabel> parse_labels(std::string_view text, const std::string& source_name) {
  std::vector<ErrorLabel> out;
  std::vector<std::string> problems;
  for_each_line(text, [&](std::size_t lineno, std::string_view line) {
    if (blank(line)) return;
    try {
      const auto j = nlohmann::json::parse(line);
      ErrorLabel l;
      l.sample_id = j.at("sample_id").get<std::string>();
      const auto g = parse_granularity(j.at("granularity").get<std::string>());
      if (!g) throw ValidationError("bad granularity");
      const auto label_text = j.at("label").get<std::string>();
      const auto label = parse_label(label_text, *g);
      if (!label) throw ValidationError("'" + label_text + "' is not a " + std::string(to_string(*g)) + " label");
      l.label = *label;
      const auto src = parse_source(j.at("source").get<std::string>());
      if (!src) throw ValidationError("bad source");
      l.source = *src;
      l.confidence = opt_field<int>(j, "confidence");
      if (l.confidence && (*l.confidence < 1 || *l.confidence > 10)) throw ValidationError("confidence outside 1..10");
      l.judge_model = opt_field<std::string>(j, "judge_model");
      l.annotator_id = opt_field<std::string>(j, "annotator_id");
      const auto ts = parse_rfc3339(j.at("timestamp").get<std::string>());
      if (!ts) throw ValidationError("timestamp is not RFC 3339 UTC");
      l.timestamp = *ts;
      out.push_back(std::move(l));
    } catch (const std::exception& e) {
      problems.push_back(fmt::format("line {}: {}", lineno, e.what()));
    }
  });
  if (!problems.empty()) throw_collected(source_name, problems);
  return out;
}

std::vector<ErrorLabel> load_labels(const std::filesystem::path& path) {
  return parse_labels(read_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Annotation set

std::vector<std::string> AnnotationParams::default_annotators(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back(fmt::format("annotator-{:02d}", i));
  return out;
}

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c));
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

std::vector<AnnotationTask> build_annotation_set(std::span<const EvalSample> pool, const AnnotationParams& params) {
  if (params.n_synthetic > params.n_total) throw ValidationError("annotation: n_synthetic exceeds n_total");
  if (params.n_synthetic == 1) throw ValidationError("annotation: shuffling needs at least two synthetic tasks");
  std::set<std::string> distinct(params.annotators.begin(), params.annotators.end());
  if (distinct.size() < 2 || distinct.size() != params.annotators.size()) {
    throw ValidationError("annotation: need at least two distinct annotator ids");
  }
  const std::size_t n_real = params.n_total - params.n_synthetic;

  struct Candidate {
    const EvalSample* sample;
    textnorm::NormalizedText ref;
    textnorm::NormalizedText hyp;
    double wer;
  };
  std::vector<Candidate> bounded;
  for (const auto& s : pool) {
    const std::size_t rw = word_count(s.reference), hw = word_count(s.hypothesis);
    if (rw < params.min_words || rw > params.max_words || hw < params.min_words || hw > params.max_words) continue;
    auto ref = textnorm::normalize_english(s.reference);
    if (ref.empty()) continue;
    auto hyp = textnorm::normalize_english(s.hypothesis);
    const double wer = metrics::word_error_rate(ref, hyp).wer;
    bounded.push_back({&s, std::move(ref), std::move(hyp), wer});
  }

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < bounded.size(); ++i) {
    if (bounded[i].wer > params.wer_threshold) eligible.push_back(i);
  }
  if (eligible.size() < n_real) {
    throw ValidationError(fmt::format(
        "annotation: need {} samples with WER > {} and {}-{} words, pool has {} (shortfall {})", n_real,
        params.wer_threshold, params.min_words, params.max_words, eligible.size(), n_real - eligible.size()));
  }
  std::vector<std::size_t> real;
  {
    std::mt19937_64 rng(kernels::derive_seed(params.seed, 0));
    std::sample(eligible.begin(), eligible.end(), std::back_inserter(real), n_real, rng);
  }
  const std::set<std::size_t> used(real.begin(), real.end());
  std::vector<std::size_t> donor_pool;
  for (std::size_t i = 0; i < bounded.size(); ++i) {
    if (!used.count(i)) donor_pool.push_back(i);
  }
  if (donor_pool.size() < params.n_synthetic) {
    throw ValidationError(fmt::format("annotation: need {} donor samples for synthetic tasks, {} left (shortfall {})",
                                      params.n_synthetic, donor_pool.size(), params.n_synthetic - donor_pool.size()));
  }
  std::vector<std::size_t> donors;
  {
    std::mt19937_64 rng(kernels::derive_seed(params.seed, 1));
    std::sample(donor_pool.begin(), donor_pool.end(), std::back_inserter(donors), params.n_synthetic, rng);
  }

  std::vector<AnnotationTask> tasks;
  tasks.reserve(params.n_total);
  for (std::size_t i : real) {
    const auto& c = bounded[i];
    AnnotationTask t;
    t.sample_id = c.sample->id;
    t.hypothesis_source_id = c.sample->id;
    t.reference = c.sample->reference;
    t.hypothesis = c.sample->hypothesis;
    t.reference_normalized = c.ref.joined;
    t.hypothesis_normalized = c.hyp.joined;
    t.wer = c.wer;
    tasks.push_back(std::move(t));
  }

  if (!donors.empty()) {
    // A cyclic shift of a shuffled order is a derangement; retry when two
    // donors happen to share identical hypothesis text.
    std::mt19937_64 rng(kernels::derive_seed(params.seed, 2));
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
      std::shuffle(donors.begin(), donors.end(), rng);
      ok = true;
      for (std::size_t k = 0; k < donors.size() && ok; ++k) {
        ok = bounded[donors[(k + 1) % donors.size()]].sample->hypothesis != bounded[donors[k]].sample->hypothesis;
      }
    }
    if (!ok) throw ValidationError("annotation: donor hypotheses are too uniform to shuffle");
    for (std::size_t k = 0; k < donors.size(); ++k) {
      const auto& base = bounded[donors[k]];
      const auto& other = bounded[donors[(k + 1) % donors.size()]];
      AnnotationTask t;
      t.sample_id = base.sample->id;
      t.hypothesis_source_id = other.sample->id;
      t.reference = base.sample->reference;
      t.hypothesis = other.sample->hypothesis;
      t.reference_normalized = base.ref.joined;
      t.hypothesis_normalized = other.hyp.joined;
      t.wer = metrics::word_error_rate(base.ref, other.hyp).wer;
      t.is_synthetic = true;
      tasks.push_back(std::move(t));
    }
  }

  std::mt19937_64 rng(kernels::derive_seed(params.seed, 3));
  std::shuffle(tasks.begin(), tasks.end(), rng);
  const int width = std::max<int>(4, static_cast<int>(std::to_string(tasks.size()).size()));
  std::map<std::string, std::size_t> load;
  for (const auto& a : params.annotators) load[a] = 0;
  std::vector<std::string> order = params.annotators;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    tasks[i].task_id = fmt::format("task-{:0{}d}", i + 1, width);
    std::shuffle(order.begin(), order.end(), rng);
    std::stable_sort(order.begin(), order.end(),
                     [&](const std::string& a, const std::string& b) { return load[a] < load[b]; });
    tasks[i].annotators = {order[0], order[1]};
    ++load[order[0]];
    ++load[order[1]];
  }
  return tasks;
}

std::string to_jsonl(const AnnotationTask& t) {
  ojson j;
  j["task_id"] = t.task_id;
  j["sample_id"] = t.sample_id;
  j["hypothesis_source_id"] = t.hypothesis_source_id;
  j["reference"] = t.reference;
  j["hypothesis"] = t.hypothesis;
  j["reference_normalized"] = t.reference_normalized;
  j["hypothesis_normalized"] = t.hypothesis_normalized;
  j["wer"] = t.wer;
  j["is_synthetic"] = t.is_synthetic;
  j["annotators"] = {t.annotators[0], t.annotators[1]};
  return j.dump();
}

void write_tasks(const std::filesystem::path& path, std::span<const AnnotationTask> tasks) {
  std::string out;
  for (const auto& t : tasks) out += to_jsonl(t) + "\n";
  write_file_atomic(path, out);
}

std::vector<AnnotationTask> load_tasks(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<AnnotationTask> out;
  std::vector<std::string> problems;
  std::set<std::string> ids;
  for_each_line(text, [&](std::size_t lineno, std::string_view line) {
    if (blank(line)) return;
    try {
      const auto j = nlohmann::json::parse(line);
      AnnotationTask t;
      t.task_id = j.at("task_id").get<std::string>();
      t.sample_id = j.value("sample_id", t.task_id);
      t.hypothesis_source_id = j.value("hypothesis_source_id", t.sample_id);
      t.reference = j.at("reference").get<std::string>();
      t.hypothesis = j.at("hypothesis").get<std::string>();
      t.reference_normalized = j.value("reference_normalized", textnorm::normalize_english(t.reference).joined);
      t.hypothesis_normalized = j.value("hypothesis_normalized", textnorm::normalize_english(t.hypothesis).joined);
      t.wer = j.value("wer", 0.0);
      t.is_synthetic = j.value("is_synthetic", false);
      const auto ann = j.at("annotators").get<std::vector<std::string>>();
      if (ann.size() != 2 || ann[0] == ann[1]) throw ValidationError("task needs exactly two distinct annotators");
      t.annotators = {ann[0], ann[1]};
      if (!ids.insert(t.task_id).second) throw ValidationError("duplicate task_id '" + t.task_id + "'");
      out.push_back(std::move(t));
    } catch (const std::exception& e) {
      problems.push_back(fmt::format("line {}: {}", lineno, e.what()));
    }
  });
  if (!problems.empty()) throw_collected(path.string(), problems);
  return out;
}

// ---------------------------------------------------------------------------
// Reports

double ReportRow::wer() const {
  return ref_words ? 100.0 * static_cast<double>(word_edits) / static_cast<double>(ref_words) : 0.0;
}

double ReportRow::cer() const {
  return ref_chars ? 100.0 * static_cast<double>(char_edits) / static_cast<double>(ref_chars) : 0.0;
}

std::optional<double> ReportRow::her_coarse() const {
  if (judged_coarse == 0) return std::nullopt;
  return static_cast<double>(he_coarse) / static_cast<double>(judged_coarse);
}

std::optional<double> ReportRow::her_fine() const {
  if (judged_fine == 0) return std::nullopt;
  return static_cast<double>(he_fine) / static_cast<double>(judged_fine);
}

std::optional<double> ReportRow::her_wer_ratio() const {
  const auto h = her_coarse();
  const double w = wer();
  if (!h || w <= 0.0) return std::nullopt;
  return *h * 100.0 / w;
}

std::vector<ReportRow> aggregate(std::span<const SampleRecord> records) {
  std::map<std::pair<std::string, std::string>, ReportRow> rows;
  for (const auto& r : records) {
    auto& row = rows[{r.model, r.dataset}];
    row.model = r.model;
    row.dataset = r.dataset;
    ++row.n;
    row.word_edits += r.word_edits;
    row.ref_words += r.ref_words;
    row.char_edits += r.char_edits;
    row.ref_chars += r.ref_chars;
    if (r.coarse_status == Status::Ok) {
      ++row.judged_coarse;
      if (r.coarse_label && *r.coarse_label == to_string(CoarseLabel::HallucinationError)) ++row.he_coarse;
    } else if (r.coarse_status == Status::Unclassified) {
      ++row.unclassified_coarse;
    }
    if (r.fine_status == Status::Ok) {
      ++row.judged_fine;
      if (r.fine_label && *r.fine_label == to_string(FineLabel::HallucinationError)) ++row.he_fine;
    } else if (r.fine_status == Status::Unclassified) {
      ++row.unclassified_fine;
    }
  }
  std::vector<ReportRow> out;
  for (auto& [key, row] : rows) out.push_back(std::move(row));
  return out;
}

void register_mock_labels(judge::MockBackend& backend, std::span<const EvalSample> samples) {
  for (const auto& s : samples) {
    const auto ref = textnorm::normalize_english(s.reference).joined;
    const auto hyp = textnorm::normalize_english(s.hypothesis).joined;
    if (s.mock_coarse) backend.replay(Granularity::Coarse, ref, hyp, *s.mock_coarse, s.mock_confidence);
    if (s.mock_fine) backend.replay(Granularity::Fine, ref, hyp, *s.mock_fine, s.mock_confidence);
  }
}

RunResult evaluate(std::span<const EvalSample> samples, const EvaluateOptions& options) {
  options.heuristic.validate();
  if ((options.judge_coarse || options.judge_fine) && options.backend == nullptr) {
    throw ValidationError("evaluate: judging requested without a backend");
  }

  std::vector<kernels::TokenList> refs(samples.size()), hyps(samples.size());
  std::vector<textnorm::NormalizedText> nref(samples.size()), nhyp(samples.size());
  std::vector<std::string> empty_refs;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    nref[i] = textnorm::normalize_english(samples[i].reference);
    nhyp[i] = textnorm::normalize_english(samples[i].hypothesis);
    if (nref[i].empty()) empty_refs.push_back(samples[i].id);
    refs[i] = nref[i].tokens;
    hyps[i] = nhyp[i].tokens;
  }
  if (!empty_refs.empty()) {
    std::string msg = "evaluate: reference is empty after normalization for:";
    for (const auto& id : empty_refs) msg += " " + id;
    throw ValidationError(msg);
  }

  const auto word_align = kernels::omp::batch_align(refs, hyps);
  RunResult result;
  result.records.resize(samples.size());
  const auto n = static_cast<std::int64_t>(samples.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& s = samples[i];
    auto& r = result.records[i];
    r.id = s.id;
    r.dataset = s.dataset;
    r.model = s.model;
    r.reference = nref[i].joined;
    r.hypothesis = nhyp[i].joined;
    const auto& wa = word_align[i];
    r.ref_words = wa.ref_len;
    r.word_edits = wa.distance;
    r.substitutions = wa.substitutions;
    r.insertions = wa.insertions;
    r.deletions = wa.deletions;
    r.wer = 100.0 * static_cast<double>(wa.distance) / static_cast<double>(wa.ref_len);
    const auto ca = metrics::char_alignment(nref[i], nhyp[i]);
    r.ref_chars = ca.ref_len;
    r.char_edits = ca.distance;
    r.cer = 100.0 * static_cast<double>(ca.distance) / static_cast<double>(ca.ref_len);
  }

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.cos_sim && s.ppl) {
      const auto verdict =
          heuristic::classify({result.records[i].wer, s.cos_sim, s.ppl}, options.heuristic);
      result.records[i].heuristic_hallucination = verdict == heuristic::Verdict::Hallucination;
      ErrorLabel l;
      l.sample_id = s.id;
      l.label = verdict == heuristic::Verdict::Hallucination ? CoarseLabel::HallucinationError
                                                             : CoarseLabel::NonHallucinationError;
      l.source = LabelSource::Heuristic;
      l.timestamp = options.timestamp;
      result.labels.push_back(std::move(l));
    }
  }

  std::vector<judge::JudgeRequest> requests(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    requests[i] = {samples[i].id, nref[i], nhyp[i].joined};
  }
  for (const Granularity g : {Granularity::Coarse, Granularity::Fine}) {
    if (g == Granularity::Coarse ? !options.judge_coarse : !options.judge_fine) continue;
    const auto verdicts = judge::classify_batch(requests, g, options.judge_config, *options.backend, options.cache,
                                                options.with_confidence, options.timestamp);
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
      auto& r = result.records[i];
      const auto& v = verdicts[i];
      Status& status = g == Granularity::Coarse ? r.coarse_status : r.fine_status;
      if (!v.classified()) {
        status = Status::Unclassified;
        continue;
      }
      status = Status::Ok;
      const std::string label(label_string(v.label->label));
      if (g == Granularity::Coarse) {
        r.coarse_label = label;
        r.coarse_confidence = v.label->confidence;
      } else {
        r.fine_label = label;
        r.fine_confidence = v.label->confidence;
      }
      result.labels.push_back(*v.label);
    }
  }
  result.rows = aggregate(result.records);
  return result;
}

std::string to_jsonl(const SampleRecord& r) {
  ojson j;
  j["id"] = r.id;
  j["dataset"] = r.dataset;
  j["model"] = r.model;
  j["reference"] = r.reference;
  j["hypothesis"] = r.hypothesis;
  j["ref_words"] = r.ref_words;
  j["ref_chars"] = r.ref_chars;
  j["word_edits"] = r.word_edits;
  j["substitutions"] = r.substitutions;
  j["insertions"] = r.insertions;
  j["deletions"] = r.deletions;
  j["char_edits"] = r.char_edits;
  j["wer"] = r.wer;
  j["cer"] = r.cer;
  j["coarse_status"] = std::string(status_string(r.coarse_status));
  j["fine_status"] = std::string(status_string(r.fine_status));
  put_opt(j, "coarse_label", r.coarse_label);
  put_opt(j, "fine_label", r.fine_label);
  put_opt(j, "coarse_confidence", r.coarse_confidence);
  put_opt(j, "fine_confidence", r.fine_confidence);
  put_opt(j, "heuristic_hallucination", r.heuristic_hallucination);
  return j.dump();
}

std::vector<SampleRecord> load_sample_records(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<SampleRecord> out;
  std::vector<std::string> problems;
  for_each_line(text, [&](std::size_t lineno, std::string_view line) {
    if (blank(line)) return;
    try {
      const auto j = nlohmann::json::parse(line);
      SampleRecord r;
      r.id = j.at("id").get<std::string>();
      r.dataset = j.at("dataset").get<std::string>();
      r.model = j.at("model").get<std::string>();
      r.reference = j.at("reference").get<std::string>();
      r.hypothesis = j.at("hypothesis").get<std::string>();
      r.ref_words = j.at("ref_words").get<std::size_t>();
      r.ref_chars = j.at("ref_chars").get<std::size_t>();
      r.word_edits = j.at("word_edits").get<std::size_t>();
      r.substitutions = j.value("substitutions", std::size_t{0});
      r.insertions = j.value("insertions", std::size_t{0});
      r.deletions = j.value("deletions", std::size_t{0});
      r.char_edits = j.at("char_edits").get<std::size_t>();
      r.wer = j.at("wer").get<double>();
      r.cer = j.at("cer").get<double>();
      r.coarse_status = parse_status(j.at("coarse_status").get<std::string>());
      r.fine_status = parse_status(j.at("fine_status").get<std::string>());
      r.coarse_label = opt_field<std::string>(j, "coarse_label");
      r.fine_label = opt_field<std::string>(j, "fine_label");
      r.coarse_confidence = opt_field<int>(j, "coarse_confidence");
      r.fine_confidence = opt_field<int>(j, "fine_confidence");
      r.heuristic_hallucination = opt_field<bool>(j, "heuristic_hallucination");
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      problems.push_back(fmt::format("line {}: {}", lineno, e.what()));
    }
  });
  if (!problems.empty()) throw_collected(path.string(), problems);
  return out;
}

std::vector<SampleRecord> load_runs(const std::filesystem::path& runs_dir) {
  if (!std::filesystem::is_directory(runs_dir)) throw ValidationError("not a directory: " + runs_dir.string());
  std::vector<std::filesystem::path> runs;
  for (const auto& e : std::filesystem::directory_iterator(runs_dir)) {
    if (e.is_directory() && std::filesystem::exists(e.path() / "samples.jsonl") &&
        !e.path().filename().string().starts_with(".")) {
      runs.push_back(e.path());
    }
  }
  std::sort(runs.begin(), runs.end());
  std::vector<SampleRecord> out;
  for (const auto& r : runs) {
    auto recs = load_sample_records(r / "samples.jsonl");
    out.insert(out.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
  }
  return out;
}

std::string report_csv(std::span<const ReportRow> rows) {
  std::string out = "model,dataset,wer,cer,her_coarse,her_fine,her_wer_ratio,n\n";
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", field(r.model), field(r.dataset), num(r.wer(), 4),
                       num(r.cer(), 4), opt_num(r.her_coarse(), 6), opt_num(r.her_fine(), 6),
                       opt_num(r.her_wer_ratio(), 4), r.n);
  }
  return out;
}

std::string report_markdown(std::span<const ReportRow> rows) {
  auto pct = [](const std::optional<double>& v) { return v ? num(*v * 100.0, 1) : std::string("-"); };
  std::string out =
      "| model | dataset | wer | cer | her_coarse (%) | her_fine (%) | her_wer_ratio | n |\n"
      "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    out += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} |\n", r.model, r.dataset, num(r.wer(), 1),
                       num(r.cer(), 1), pct(r.her_coarse()), pct(r.her_fine()),
                       r.her_wer_ratio() ? num(*r.her_wer_ratio(), 2) : "-", r.n);
  }

  std::set<std::string> datasets;
  std::map<std::string, std::map<std::string, const ReportRow*>> grid;
  for (const auto& r : rows) {
    datasets.insert(r.dataset);
    grid[r.model][r.dataset] = &r;
  }
  auto pivot = [&](const std::string& title, auto cell) {
    std::string t = "\n" + title + "\n\n| model |";
    std::string rule = "|---|";
    for (const auto& d : datasets) {
      t += " " + d + " |";
      rule += "---|";
    }
    t += "\n" + rule + "\n";
    for (const auto& [model, cols] : grid) {
      t += "| " + model + " |";
      for (const auto& d : datasets) {
        const auto it = cols.find(d);
        t += " " + (it == cols.end() ? std::string("-") : cell(*it->second)) + " |";
      }
      t += "\n";
    }
    return t;
  };
  out += pivot("WER/HER (coarse HER, %)",
               [&](const ReportRow& r) { return num(r.wer(), 1) + "/" + pct(r.her_coarse()); });
  out += pivot("HER/WER ratio", [](const ReportRow& r) {
    return r.her_wer_ratio() ? num(*r.her_wer_ratio(), 2) : std::string("-");
  });
  return out;
}

std::string report_json(std::span<const ReportRow> rows) {
  ojson arr = ojson::array();
  auto opt = [](const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); };
  for (const auto& r : rows) {
    ojson j;
    j["model"] = r.model;
    j["dataset"] = r.dataset;
    j["wer"] = r.wer();
    j["cer"] = r.cer();
    j["her_coarse"] = opt(r.her_coarse());
    j["her_fine"] = opt(r.her_fine());
    j["her_wer_ratio"] = opt(r.her_wer_ratio());
    j["n"] = r.n;
    j["unclassified_count"] = r.unclassified_count();
    j["word_edits"] = r.word_edits;
    j["ref_words"] = r.ref_words;
    j["char_edits"] = r.char_edits;
    j["ref_chars"] = r.ref_chars;
    j["judged_coarse"] = r.judged_coarse;
    j["judged_fine"] = r.judged_fine;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::filesystem::path write_run(const std::filesystem::path& runs_dir, const std::string& run_id,
                                const RunResult& result, const std::string& meta_json) {
  if (run_id.empty() || run_id.find('/') != std::string::npos || run_id.starts_with(".")) {
    throw ValidationError("invalid run id '" + run_id + "'");
  }
  namespace fs = std::filesystem;
  fs::create_directories(runs_dir);
  const fs::path final_dir = runs_dir / run_id;
  const fs::path tmp_dir = runs_dir / (".tmp-" + run_id);
  fs::remove_all(tmp_dir);
  fs::create_directories(tmp_dir);
  try {
    std::string samples;
    for (const auto& r : result.records) samples += to_jsonl(r) + "\n";
    std::string labels;
    for (const auto& l : result.labels) labels += to_jsonl(l) + "\n";
    write_file_atomic(tmp_dir / "samples.jsonl", samples);
    write_file_atomic(tmp_dir / "labels.jsonl", labels);
    write_file_atomic(tmp_dir / "report.csv", report_csv(result.rows));
    write_file_atomic(tmp_dir / "meta.json", meta_json);
    fs::remove_all(final_dir);
    fs::rename(tmp_dir, final_dir);
  } catch (...) {
    fs::remove_all(tmp_dir);
    throw;
  }

  std::set<std::string> ids;
  for (const auto& e : fs::directory_iterator(runs_dir)) {
    const auto name = e.path().filename().string();
    if (e.is_directory() && !name.starts_with(".")) ids.insert(name);
  }
  ojson index;
  index["runs"] = ids;
  write_file_atomic(runs_dir / "index.json", index.dump(2) + "\n");
  return final_dir;
}

}  // namespace hereval::corpus
