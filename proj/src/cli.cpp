// src/cli.cpp

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

#include "hereval/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hereval/annotate.hpp"
#include "hereval/audio.hpp"
#include "hereval/corpus.hpp"
#include "hereval/error.hpp"
#include "hereval/heuristic.hpp"
#include "hereval/judge.hpp"
#include "hereval/kernels.hpp"
#include "hereval/metrics.hpp"
#include "hereval/perturb.hpp"
#include "hereval/shift.hpp"
#include "hereval/stats.hpp"
#include "hereval/textnorm.hpp"

namespace hereval::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

constexpr std::string_view kVersion = "0.1.0";

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

UtcTime resolve_timestamp(const std::string& flag) {
  if (!flag.empty()) {
    const auto t = parse_rfc3339(flag);
    if (!t) throw ValidationError("--timestamp: expected YYYY-MM-DDTHH:MM:SSZ, got '" + flag + "'");
    return *t;
  }
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
    char* end = nullptr;
    const long long secs = std::strtoll(env, &end, 10);
    if (*end != '\0' || secs < 0) throw ValidationError("SOURCE_DATE_EPOCH is not a non-negative integer");
    return UtcTime{std::chrono::seconds{secs}};
  }
  return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

struct JudgeFlags {
  bool mock = false;
  std::string model = judge::JudgeConfig{}.model_name;
  std::string url;
  int retries = 3;
  int concurrency = 4;
  double timeout_s = 60.0;
  double backoff_s = 1.0;
  std::string cache;

  void add(CLI::App& app) {
    app.add_flag("--mock-judge", mock, "Use the offline mock judge (labels replayed from the manifest)");
    app.add_option("--model", model, "Judge model name")->capture_default_str();
    app.add_option("--url", url, "Judge endpoint (overrides HEREVAL_LLM_URL)");
    app.add_option("--retries", retries, "Retries per sample")->check(CLI::Range(0, 100))->capture_default_str();
    app.add_option("--concurrency", concurrency, "Concurrent judge requests")
        ->check(CLI::Range(1, 1024))
        ->capture_default_str();
    app.add_option("--timeout", timeout_s, "Per-request timeout in seconds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--backoff", backoff_s, "Initial retry backoff in seconds")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--cache", cache, "Append-only JSONL judge cache");
  }

  judge::JudgeConfig config() const {
    judge::JudgeConfig c;
    c.model_name = mock ? "mock" : model;
    if (auto u = env("HEREVAL_LLM_URL")) c.endpoint_url = *u;
    if (!url.empty()) c.endpoint_url = url;
    c.max_retries = retries;
    c.concurrency_limit = concurrency;
    c.cache_path = cache;
    c.timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
    c.backoff_base = std::chrono::milliseconds(static_cast<long long>(backoff_s * 1000));
    if (mock) c.backoff_base = std::chrono::milliseconds(0);
    c.validate();
    return c;
  }

  std::unique_ptr<judge::ChatBackend> backend(std::span<const corpus::EvalSample> samples,
                                              const judge::JudgeConfig& c) const {
    if (mock) {
      auto m = std::make_unique<judge::MockBackend>();
      corpus::register_mock_labels(*m, samples);
      return m;
    }
    auto key = env("HEREVAL_LLM_API_KEY");
    if (!key) {
      throw ValidationError("HEREVAL_LLM_API_KEY is not set; pass --mock-judge to run offline");
    }
    return std::make_unique<judge::HttpChatBackend>(c.endpoint_url, key);
  }
};

struct HeuristicFlags {
  std::string combinator = "all";
  heuristic::Thresholds t;

  void add(CLI::App& app) {
    app.add_option("--combinator", combinator, "Combine predicates with all or any")
        ->check(CLI::IsMember({"all", "any"}))
        ->capture_default_str();
    app.add_option("--cos", t.cosine_max, "Cosine similarity must be below this")->capture_default_str();
    app.add_option("--wer", t.wer_min, "WER (percent) must exceed this")->capture_default_str();
    app.add_option("--ppl", t.perplexity_max, "Perplexity must be below this")->capture_default_str();
  }

  heuristic::Thresholds thresholds() const {
    auto out = t;
    out.combinator = combinator == "any" ? heuristic::Combinator::Any : heuristic::Combinator::All;
    out.validate();
    return out;
  }
};

Granularity parse_granularity_flag(const std::string& s) {
  const auto g = parse_granularity(s);
  if (!g) throw ValidationError("--granularity: expected coarse or fine, got '" + s + "'");
  return *g;
}

std::vector<corpus::EvalSample> load_and_sample(const std::string& manifest, std::size_t sample,
                                                std::uint64_t seed) {
  auto samples = corpus::load_manifest(manifest);
  if (sample > 0) samples = corpus::sample_n(samples, sample, seed);
  return samples;
}

void emit(const std::string& out_path, const std::string& content, std::ostream& out) {
  if (out_path.empty() || out_path == "-") {
    out << content;
  } else {
    corpus::write_file_atomic(out_path, content);
  }
}

ojson thresholds_json(const heuristic::Thresholds& t) {
  return {{"cos", t.cosine_max},
          {"wer", t.wer_min},
          {"ppl", t.perplexity_max},
          {"combinator", t.combinator == heuristic::Combinator::All ? "all" : "any"}};
}

// ---------------------------------------------------------------------------

int cmd_evaluate(const std::string& manifest, const std::string& out_dir, std::string run_id,
                 const std::string& judge_mode, bool confidence, std::size_t sample, std::uint64_t seed,
                 const std::string& timestamp_flag, const JudgeFlags& jf, const HeuristicFlags& hf,
                 std::ostream& out) {
  const auto samples = load_and_sample(manifest, sample, seed);
  if (samples.empty()) throw ValidationError("--manifest: no samples in " + manifest);
  corpus::EvaluateOptions opt;
  opt.judge_coarse = judge_mode == "coarse" || judge_mode == "both";
  opt.judge_fine = judge_mode == "fine" || judge_mode == "both";
  opt.with_confidence = confidence;
  opt.heuristic = hf.thresholds();
  opt.timestamp = resolve_timestamp(timestamp_flag);
  std::unique_ptr<judge::ChatBackend> backend;
  std::unique_ptr<judge::JudgeCache> cache;
  if (opt.judge_coarse || opt.judge_fine) {
    opt.judge_config = jf.config();
    backend = jf.backend(samples, opt.judge_config);
    opt.backend = backend.get();
    cache = jf.cache.empty() ? std::make_unique<judge::JudgeCache>()
                             : std::make_unique<judge::JudgeCache>(fs::path(jf.cache));
    opt.cache = cache.get();
  }

  const auto result = corpus::evaluate(samples, opt);

  std::vector<corpus::SampleRecord> pooled = result.records;
  for (auto& r : pooled) r.model = r.dataset = "all";
  const auto overall = corpus::aggregate(pooled).at(0);

  ojson meta;
  meta["tool"] = "hereval";
  meta["version"] = std::string(kVersion);
  meta["manifest"] = manifest;
  meta["manifest_sha256"] = judge::sha256_hex(read_text(manifest));
  meta["n_samples"] = samples.size();
  meta["sample"] = sample;
  meta["seed"] = seed;
  meta["judge"] = judge_mode;
  meta["confidence"] = confidence;
  if (opt.backend) {
    meta["judge_model"] = opt.judge_config.model_name;
    meta["temperature"] = opt.judge_config.temperature;
    meta["template_sha256"] = {{"coarse", judge::template_hash(Granularity::Coarse)},
                               {"fine", judge::template_hash(Granularity::Fine)}};
  }
  meta["heuristic"] = thresholds_json(opt.heuristic);
  meta["timestamp"] = format_rfc3339(opt.timestamp);
  if (run_id.empty()) {
    ojson key = meta;
    key.erase("timestamp");
    run_id = "run-" + judge::sha256_hex(key.dump()).substr(0, 12);
  }
  meta["run_id"] = run_id;
  auto opt_json = [](const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); };
  meta["overall"] = {{"n", overall.n},
                     {"wer", overall.wer()},
                     {"cer", overall.cer()},
                     {"her_coarse", opt_json(overall.her_coarse())},
                     {"her_fine", opt_json(overall.her_fine())},
                     {"unclassified", overall.unclassified_count()}};

  const auto dir = corpus::write_run(out_dir, run_id, result, meta.dump(2) + "\n");
  out << corpus::report_csv(result.rows);
  out << fmt::format("# overall n={} wer={:.4f} cer={:.4f} her_coarse={} her_fine={} unclassified={}\n",
                     overall.n, overall.wer(), overall.cer(),
                     overall.her_coarse() ? fmt::format("{:.6f}", *overall.her_coarse()) : "-",
                     overall.her_fine() ? fmt::format("{:.6f}", *overall.her_fine()) : "-",
                     overall.unclassified_count());
  out << "# run " << dir.string() << "\n";
  return kExitOk;
}

int cmd_judge(const std::string& manifest, const std::string& granularity, bool confidence, std::size_t sample,
              std::uint64_t seed, const std::string& timestamp_flag, const std::string& out_path,
              const JudgeFlags& jf, std::ostream& out, std::ostream& err) {
  const auto g = parse_granularity_flag(granularity);
  const auto samples = load_and_sample(manifest, sample, seed);
  const auto config = jf.config();
  auto backend = jf.backend(samples, config);
  auto cache = jf.cache.empty() ? std::make_unique<judge::JudgeCache>()
                                : std::make_unique<judge::JudgeCache>(fs::path(jf.cache));
  std::vector<judge::JudgeRequest> requests;
  for (const auto& s : samples) {
    auto ref = textnorm::normalize_english(s.reference);
    if (ref.empty()) throw ValidationError("sample '" + s.id + "': reference is empty after normalization");
    requests.push_back({s.id, std::move(ref), textnorm::normalize_english(s.hypothesis).joined});
  }
  const auto verdicts =
      judge::classify_batch(requests, g, config, *backend, cache.get(), confidence, resolve_timestamp(timestamp_flag));
  std::string body;
  std::size_t he = 0, judged = 0;
  for (const auto& v : verdicts) {
    if (!v.classified()) {
      err << fmt::format("unclassified {}: {}\n", v.sample_id, v.error);
      continue;
    }
    ++judged;
    if (is_hallucination(v.label->label)) ++he;
    body += corpus::to_jsonl(*v.label) + "\n";
  }
  emit(out_path, body, out);
  err << fmt::format("judged {} of {}; her {}\n", judged, verdicts.size(),
                     judged ? fmt::format("{:.6f}", static_cast<double>(he) / static_cast<double>(judged)) : "-");
  return kExitOk;
}

int cmd_heuristic(const std::string& manifest, const std::string& timestamp_flag, const std::string& out_path,
                  const HeuristicFlags& hf, std::ostream& out, std::ostream& err) {
  const auto t = hf.thresholds();
  const auto samples = corpus::load_manifest(manifest);
  std::vector<std::string> missing;
  for (const auto& s : samples) {
    if (!s.cos_sim || !s.ppl) missing.push_back(s.id);
  }
  if (!missing.empty()) {
    std::string ids;
    for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 10); ++i) ids += " " + missing[i];
    throw ValidationError(fmt::format("--manifest: {} sample(s) lack cos_sim or ppl:{}{}", missing.size(), ids,
                                      missing.size() > 10 ? " ..." : ""));
  }
  const auto ts = resolve_timestamp(timestamp_flag);
  std::string body;
  std::size_t he = 0;
  for (const auto& s : samples) {
    const auto ref = textnorm::normalize_english(s.reference);
    if (ref.empty()) throw ValidationError("sample '" + s.id + "': reference is empty after normalization");
    const double wer = metrics::word_error_rate(ref, textnorm::normalize_english(s.hypothesis)).wer;
    const auto v = heuristic::classify({wer, s.cos_sim, s.ppl}, t);
    ErrorLabel l;
    l.sample_id = s.id;
    l.label = v == heuristic::Verdict::Hallucination ? CoarseLabel::HallucinationError
                                                     : CoarseLabel::NonHallucinationError;
    l.source = LabelSource::Heuristic;
    l.timestamp = ts;
    if (v == heuristic::Verdict::Hallucination) ++he;
    body += corpus::to_jsonl(l) + "\n";
  }
  emit(out_path, body, out);
  err << fmt::format("flagged {} of {}\n", he, samples.size());
  return kExitOk;
}

int cmd_shift(const std::string& embeddings, const std::string& reports, const std::string& source,
              const std::string& out_path, const std::string& kind_flag, const std::string& her_granularity,
              std::ostream& out) {
  const auto embs = shift::load_embedding_dir(embeddings);
  const auto records = corpus::load_runs(reports);
  if (records.empty()) throw ValidationError("--reports: no runs under " + reports);
  const auto rows = corpus::aggregate(records);
  const bool fine = parse_granularity_flag(her_granularity) == Granularity::Fine;
  std::vector<shift::DomainRates> rates;
  for (const auto& r : rows) {
    rates.push_back({r.model, r.dataset, r.wer(), fine ? r.her_fine() : r.her_coarse()});
  }
  const auto kind = kind_flag == "spearman" ? shift::CorrelationKind::Spearman : shift::CorrelationKind::Pearson;
  const auto table = shift::shift_degradation_table(rates, embs, source, kind);
  const bool json = out_path.size() >= 5 && out_path.ends_with(".json");
  emit(out_path, json ? shift::to_json(table) : shift::to_csv(table), out);
  return kExitOk;
}

int cmd_perturb(const std::string& in_dir, const std::string& out_dir, perturb::PerturbSpec spec,
                const std::string& kind, const std::string& format, std::ostream& out) {
  const auto k = perturb::parse_kind(kind);
  if (!k) throw ValidationError("--kind: unknown perturbation '" + kind + "'");
  spec.kind = *k;
  spec.validate();
  if (!fs::is_directory(in_dir)) throw ValidationError("--in: not a directory: " + in_dir);

  std::vector<fs::path> inputs;
  for (const auto& e : fs::recursive_directory_iterator(in_dir)) {
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (e.is_regular_file() && ext == ".wav") inputs.push_back(fs::relative(e.path(), in_dir));
  }
  std::sort(inputs.begin(), inputs.end());
  if (inputs.empty()) throw ValidationError("--in: no .wav files under " + in_dir);

  std::optional<audio::AudioBuffer> resource;
  if (spec.kind == perturb::Kind::Reverb) {
    if (spec.impulse_response.empty()) throw ValidationError("--ir is required for reverb");
    resource = audio::read_wav(spec.impulse_response);
  } else if (spec.kind == perturb::Kind::BackgroundMix) {
    if (spec.background.empty()) throw ValidationError("--background is required for background_mix");
    resource = audio::read_wav(spec.background);
  }
  const auto wav_format = format == "pcm16" ? audio::WavFormat::Pcm16 : audio::WavFormat::Float32;

  // Read and transform everything before writing anything.
  std::vector<audio::AudioBuffer> outputs;
  std::vector<perturb::PerturbSpec> specs;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto s = spec;
    s.seed = kernels::derive_seed(spec.seed, i);
    const auto in = audio::read_wav(fs::path(in_dir) / inputs[i]);
    outputs.push_back(perturb::apply(s, in, resource ? &*resource : nullptr));
    specs.push_back(s);
  }

  std::string manifest;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const fs::path dst = fs::path(out_dir) / inputs[i];
    fs::create_directories(dst.parent_path());
    fs::path tmp = dst;
    tmp += ".tmp";
    audio::write_wav(tmp, outputs[i], wav_format);
    fs::rename(tmp, dst);
    auto j = nlohmann::json::parse(specs[i].to_json());
    ojson line;
    line["source_path"] = (fs::path(in_dir) / inputs[i]).generic_string();
    line["output_path"] = dst.generic_string();
    line["spec"] = j;
    line["seed"] = specs[i].seed;
    manifest += line.dump() + "\n";
  }
  corpus::write_file_atomic(fs::path(out_dir) / "perturbations.jsonl", manifest);
  out << fmt::format("perturbed {} file(s) with {}\n", inputs.size(), kind);
  return kExitOk;
}

std::vector<stats::RatedLabel> rated_labels(const std::string& path, Granularity g, const std::string& source,
                                            const std::string& project) {
  const auto labels = corpus::load_labels(path);
  std::vector<stats::RatedLabel> out;
  for (const auto& l : labels) {
    if (!source.empty() && to_string(l.source) != source) continue;
    std::string label;
    if (project == "binary") {
      label = is_hallucination(l.label) ? "Hallucination Error" : "Other";
    } else if (project == "coarse") {
      label = std::string(to_string(to_coarse(l.label)));
    } else {
      if (l.granularity() != g) continue;
      label = std::string(label_string(l.label));
    }
    std::string rater = l.annotator_id  ? *l.annotator_id
                        : l.judge_model ? *l.judge_model
                                        : std::string(to_string(l.source));
    out.push_back({l.sample_id, rater, label});
  }
  if (out.empty()) throw ValidationError("--labels: no usable labels in " + path);
  return out;
}

int cmd_agreement(const std::vector<std::string>& files, std::size_t iters, std::uint64_t seed,
                  const std::string& granularity, const std::string& project, const std::string& source_a,
                  const std::string& source_b, std::ostream& out) {
  const auto g = parse_granularity_flag(granularity);
  if (files.size() == 1) {
    const auto labels = rated_labels(files[0], g, source_a, project);
    const auto h = stats::human_human_agreement(labels, iters, seed);
    out << fmt::format("raw_agreement {:.4f}\nstd {:.4f}\nn {}\nper_annotator_mean {:.4f}\n",
                       h.micro.raw_agreement, h.micro.std, h.micro.n, h.per_annotator_mean);
    for (const auto& [id, v] : h.per_annotator) out << fmt::format("annotator {} {:.4f}\n", id, v);
    return kExitOk;
  }
  if (files.size() != 2) throw ValidationError("--labels: pass one file (two raters per sample) or two files");
  auto a = rated_labels(files[0], g, source_a, project);
  auto b = rated_labels(files[1], g, source_b.empty() ? source_a : source_b, project);
  const auto r = stats::grouped_agreement(a, b, iters, seed);
  out << fmt::format("raw_agreement {:.4f}\nstd {:.4f}\nn {}\n", r.raw_agreement, r.std, r.n);
  return kExitOk;
}

int cmd_cost(double n, const stats::CostModel& model, std::ostream& out) {
  const auto c = stats::estimate_cost(n, model);
  out << fmt::format("llm_input_cost {:.2f}\n", c.llm_input_cost);
  out << fmt::format("llm_output_cost {:.2f}\n", c.llm_output_cost);
  out << fmt::format("llm_cost {:.2f}\n", c.llm_cost);
  out << fmt::format("human_minutes {:.2f}\n", c.human_minutes);
  out << fmt::format("human_cost {:.2f}\n", c.human_cost);
  out << fmt::format("ratio {:.2f}\n", c.ratio);
  return kExitOk;
}

int cmd_report(const std::string& runs, const std::string& format, const std::string& out_path, std::ostream& out) {
  const auto records = corpus::load_runs(runs);
  if (records.empty()) throw ValidationError("--runs: no runs under " + runs);
  const auto rows = corpus::aggregate(records);
  std::string body = format == "md"     ? corpus::report_markdown(rows)
                     : format == "json" ? corpus::report_json(rows)
                                        : corpus::report_csv(rows);
  emit(out_path, body, out);
  return kExitOk;
}

int cmd_annotate_build(const std::string& manifest, const std::string& out_path, corpus::AnnotationParams params,
                       std::size_t n_annotators, const std::vector<std::string>& ids, std::ostream& out) {
  params.annotators = ids.empty() ? corpus::AnnotationParams::default_annotators(n_annotators) : ids;
  const auto pool = corpus::load_manifest(manifest);
  const auto tasks = corpus::build_annotation_set(pool, params);
  corpus::write_tasks(out_path, tasks);
  std::map<std::string, std::size_t> load;
  std::size_t synthetic = 0;
  for (const auto& t : tasks) {
    for (const auto& a : t.annotators) ++load[a];
    if (t.is_synthetic) ++synthetic;
  }
  const auto [lo, hi] = std::minmax_element(load.begin(), load.end(),
                                            [](const auto& x, const auto& y) { return x.second < y.second; });
  out << fmt::format("tasks {} (real {}, synthetic {}), annotators {}, load {}..{}\n", tasks.size(),
                     tasks.size() - synthetic, synthetic, load.size(), lo->second, hi->second);
  return kExitOk;
}

int cmd_annotate_serve(const std::string& tasks_path, const std::string& store_path, const std::string& mode,
                       annotate::ServerOptions options, const std::string& tokens_path, std::ostream& out) {
  auto tasks = corpus::load_tasks(tasks_path);
  if (!tokens_path.empty()) options.tokens = annotate::load_tokens(tokens_path);
  annotate::AnnotationStore store(std::move(tasks), fs::path(store_path), parse_granularity_flag(mode));
  annotate::Server server(store, options);
  out << fmt::format("serving {} on http://{}:{}\n", tasks_path, options.host, options.port) << std::flush;
  server.run();
  return kExitOk;
}

int cmd_confidence(const std::string& labels_path, const std::string& granularity, std::ostream& out) {
  const auto g = parse_granularity_flag(granularity);
  std::vector<stats::LabelConfidence> items;
  for (const auto& l : corpus::load_labels(labels_path)) {
    if (l.granularity() == g && l.confidence) items.push_back({std::string(label_string(l.label)), *l.confidence});
  }
  if (items.empty()) throw ValidationError("--labels: no labels with confidence at " + granularity + " granularity");
  out << stats::to_markdown(stats::confidence_summary(items));
  return kExitOk;
}

int cmd_transitions(const std::string& normalized, const std::string& orthographic, const std::string& granularity,
                    std::ostream& out) {
  const auto g = parse_granularity_flag(granularity);
  auto keyed = [&](const std::string& path) {
    std::map<std::string, std::string> m;
    for (const auto& l : corpus::load_labels(path)) {
      if (l.granularity() == g && l.source == LabelSource::Llm) m[l.sample_id] = std::string(label_string(l.label));
    }
    return m;
  };
  const auto tm = stats::transition_matrix(keyed(normalized), keyed(orthographic));
  out << stats::to_markdown(tm);
  out << fmt::format("\noverall_agreement {:.4f}\n", tm.overall_agreement());
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ASR transcript error and hallucination evaluation", "hereval"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::function<int()> action;

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score a manifest: WER, CER, judge labels, HER");
  std::string ev_manifest, ev_out = "runs", ev_run_id, ev_judge = "coarse", ev_ts;
  bool ev_conf = false;
  std::size_t ev_sample = 0;
  std::uint64_t ev_seed = 0;
  JudgeFlags ev_jf;
  HeuristicFlags ev_hf;
  ev->add_option("--manifest", ev_manifest, "JSONL manifest")->required()->check(CLI::ExistingFile);
  ev->add_option("--out", ev_out, "Runs directory")->capture_default_str();
  ev->add_option("--run-id", ev_run_id, "Run id (default: derived from inputs)");
  ev->add_option("--judge", ev_judge, "Judge granularity")
      ->check(CLI::IsMember({"coarse", "fine", "both", "none"}))
      ->capture_default_str();
  ev->add_flag("--confidence", ev_conf, "Also elicit verbalized confidence");
  ev->add_option("--sample", ev_sample, "Evaluate a seeded random subset of this size (0: all)");
  ev->add_option("--seed", ev_seed, "Sampling seed")->capture_default_str();
  ev->add_option("--timestamp", ev_ts, "Label timestamp (default: SOURCE_DATE_EPOCH or now)");
  ev_jf.add(*ev);
  ev_hf.add(*ev);
  ev->callback([&] {
    action = [&] {
      return cmd_evaluate(ev_manifest, ev_out, ev_run_id, ev_judge, ev_conf, ev_sample, ev_seed, ev_ts, ev_jf, ev_hf,
                          out);
    };
  });

  // judge
  auto* jd = app.add_subcommand("judge", "Classify manifest samples with the LLM judge");
  std::string jd_manifest, jd_gran = "coarse", jd_ts, jd_out;
  bool jd_conf = false;
  std::size_t jd_sample = 0;
  std::uint64_t jd_seed = 0;
  JudgeFlags jd_jf;
  jd->add_option("--manifest", jd_manifest, "JSONL manifest")->required()->check(CLI::ExistingFile);
  jd->add_option("--granularity", jd_gran, "coarse or fine")
      ->check(CLI::IsMember({"coarse", "fine"}))
      ->capture_default_str();
  jd->add_flag("--confidence", jd_conf, "Also elicit verbalized confidence");
  jd->add_option("--sample", jd_sample, "Judge a seeded random subset of this size (0: all)");
  jd->add_option("--seed", jd_seed, "Sampling seed")->capture_default_str();
  jd->add_option("--timestamp", jd_ts, "Label timestamp (default: SOURCE_DATE_EPOCH or now)");
  jd->add_option("--out", jd_out, "Labels JSONL (default: stdout)");
  jd_jf.add(*jd);
  jd->callback([&] {
    action = [&] {
      return cmd_judge(jd_manifest, jd_gran, jd_conf, jd_sample, jd_seed, jd_ts, jd_out, jd_jf, out, err);
    };
  });

  // heuristic
  auto* hu = app.add_subcommand("heuristic", "Flag hallucinations from cosine similarity, WER and perplexity");
  std::string hu_manifest, hu_ts, hu_out;
  HeuristicFlags hu_hf;
  hu->add_option("--manifest", hu_manifest, "JSONL manifest with cos_sim and ppl")
      ->required()
      ->check(CLI::ExistingFile);
  hu->add_option("--timestamp", hu_ts, "Label timestamp (default: SOURCE_DATE_EPOCH or now)");
  hu->add_option("--out", hu_out, "Labels JSONL (default: stdout)");
  hu_hf.add(*hu);
  hu->callback([&] { action = [&] { return cmd_heuristic(hu_manifest, hu_ts, hu_out, hu_hf, out, err); }; });

  // shift
  auto* sh = app.add_subcommand("shift", "CMD shift versus WER/HER degradation");
  std::string sh_emb, sh_rep, sh_src, sh_out, sh_kind = "pearson", sh_gran = "coarse";
  sh->add_option("--embeddings", sh_emb, "Directory of per-domain embeddings")
      ->required()
      ->check(CLI::ExistingDirectory);
  sh->add_option("--reports", sh_rep, "Runs directory")->required()->check(CLI::ExistingDirectory);
  sh->add_option("--source", sh_src, "Source domain")->required();
  sh->add_option("--out", sh_out, "Output CSV, or JSON when the name ends in .json (default: stdout)");
  sh->add_option("--correlation", sh_kind, "pearson or spearman")
      ->check(CLI::IsMember({"pearson", "spearman"}))
      ->capture_default_str();
  sh->add_option("--her-granularity", sh_gran, "HER granularity for HERD")
      ->check(CLI::IsMember({"coarse", "fine"}))
      ->capture_default_str();
  sh->callback([&] { action = [&] { return cmd_shift(sh_emb, sh_rep, sh_src, sh_out, sh_kind, sh_gran, out); }; });

  // perturb
  auto* pt = app.add_subcommand("perturb", "Apply a seeded audio perturbation to every WAV file in a directory");
  std::string pt_in, pt_out, pt_kind, pt_format = "float32";
  perturb::PerturbSpec pt_spec;
  pt->add_option("--in", pt_in, "Input directory")->required()->check(CLI::ExistingDirectory);
  pt->add_option("--out", pt_out, "Output directory")->required();
  pt->add_option("--kind", pt_kind, "Perturbation kind")
      ->required()
      ->check(CLI::IsMember(
          {"white_noise", "time_stretch", "pitch_shift", "echo", "reverb", "distortion", "background_mix"}));
  pt->add_option("--snr", pt_spec.snr_db, "Target SNR in dB (white_noise, background_mix)")->capture_default_str();
  pt->add_option("--rate", pt_spec.stretch_rate, "Stretch rate (time_stretch)")->capture_default_str();
  pt->add_option("--semitones", pt_spec.semitones, "Pitch shift in semitones")->capture_default_str();
  pt->add_option("--delay-ms", pt_spec.delay_ms, "Echo delay")->capture_default_str();
  pt->add_option("--decay", pt_spec.decay, "Echo decay")->capture_default_str();
  pt->add_option("--gain", pt_spec.clip_gain, "Distortion pre-clip gain")->capture_default_str();
  pt->add_option("--ir", pt_spec.impulse_response, "Impulse response WAV (reverb)")->check(CLI::ExistingFile);
  pt->add_option("--max-ir-seconds", pt_spec.max_ir_seconds, "Impulse response length cap")->capture_default_str();
  pt->add_option("--background", pt_spec.background, "Background WAV (background_mix)")->check(CLI::ExistingFile);
  pt->add_flag("--loop", pt_spec.loop, "Loop a short background instead of rejecting it");
  pt->add_option("--format", pt_format, "Output sample format")
      ->check(CLI::IsMember({"float32", "pcm16"}))
      ->capture_default_str();
  pt->add_option("--seed", pt_spec.seed, "Random seed")->capture_default_str();
  pt->callback([&] { action = [&] { return cmd_perturb(pt_in, pt_out, pt_spec, pt_kind, pt_format, out); }; });

  // agreement
  auto* ag = app.add_subcommand("agreement", "Raw agreement between label sets with bootstrap std");
  std::vector<std::string> ag_files;
  std::size_t ag_iters = stats::kDefaultBootstrapIters;
  std::uint64_t ag_seed = 0;
  std::string ag_gran = "coarse", ag_project = "none", ag_src_a, ag_src_b;
  ag->add_option("--labels", ag_files, "Label JSONL; once for human-human, twice for a pairwise comparison")
      ->required()
      ->check(CLI::ExistingFile);
  ag->add_option("--bootstrap", ag_iters, "Bootstrap iterations")->check(CLI::Range(1, 10000000))->capture_default_str();
  ag->add_option("--seed", ag_seed, "Bootstrap seed")->capture_default_str();
  ag->add_option("--granularity", ag_gran, "Label granularity to compare")
      ->check(CLI::IsMember({"coarse", "fine"}))
      ->capture_default_str();
  ag->add_option("--project", ag_project, "Compare raw labels, coarse projections, or hallucination vs other")
      ->check(CLI::IsMember({"none", "coarse", "binary"}))
      ->capture_default_str();
  ag->add_option("--source-a", ag_src_a, "Keep only labels from this source in the first file")
      ->check(CLI::IsMember({"llm", "human", "heuristic"}));
  ag->add_option("--source-b", ag_src_b, "Keep only labels from this source in the second file")
      ->check(CLI::IsMember({"llm", "human", "heuristic"}));
  ag->callback([&] {
    action = [&] { return cmd_agreement(ag_files, ag_iters, ag_seed, ag_gran, ag_project, ag_src_a, ag_src_b, out); };
  });

  // annotate
  auto* an = app.add_subcommand("annotate", "Human annotation set and labeling service");
  an->require_subcommand(1);
  auto* ab = an->add_subcommand("build", "Build the annotation task set");
  std::string ab_manifest, ab_out;
  corpus::AnnotationParams ab_params;
  std::size_t ab_n_annotators = 20;
  std::vector<std::string> ab_ids;
  ab->add_option("--manifest", ab_manifest, "Sample pool manifest")->required()->check(CLI::ExistingFile);
  ab->add_option("--out", ab_out, "Tasks JSONL")->required();
  ab->add_option("--n-total", ab_params.n_total, "Total tasks")->capture_default_str();
  ab->add_option("--n-synthetic", ab_params.n_synthetic, "Synthetic (shuffled) tasks")->capture_default_str();
  ab->add_option("--annotators", ab_n_annotators, "Pool size (ids annotator-01..)")
      ->check(CLI::Range(2, 10000))
      ->capture_default_str();
  ab->add_option("--annotator-ids", ab_ids, "Explicit annotator ids")->delimiter(',');
  ab->add_option("--wer-threshold", ab_params.wer_threshold, "Real tasks need WER above this")->capture_default_str();
  ab->add_option("--min-words", ab_params.min_words, "Minimum words per text")->capture_default_str();
  ab->add_option("--max-words", ab_params.max_words, "Maximum words per text")->capture_default_str();
  ab->add_option("--seed", ab_params.seed, "Random seed")->capture_default_str();
  ab->callback([&] {
    action = [&] { return cmd_annotate_build(ab_manifest, ab_out, ab_params, ab_n_annotators, ab_ids, out); };
  });

  auto* as = an->add_subcommand("serve", "Serve the annotation HTTP API");
  std::string as_tasks, as_store, as_mode = "coarse", as_tokens;
  std::string as_ui;
  annotate::ServerOptions as_opts;
  as->add_option("--tasks", as_tasks, "Tasks JSONL")->required()->check(CLI::ExistingFile);
  as->add_option("--store", as_store, "Append-only response log")->required();
  as->add_option("--mode", as_mode, "Label taxonomy")->check(CLI::IsMember({"coarse", "fine"}))->capture_default_str();
  as->add_option("--host", as_opts.host, "Bind address")->capture_default_str();
  as->add_option("--port", as_opts.port, "Port")->check(CLI::Range(0, 65535))->capture_default_str();
  as->add_option("--ui", as_ui, "Static UI directory (default: built-in page)")->check(CLI::ExistingDirectory);
  as->add_option("--tokens", as_tokens, "JSON map of annotator id to token")->check(CLI::ExistingFile);
  as->callback([&] {
    action = [&] {
      if (!as_ui.empty()) as_opts.ui_dir = as_ui;
      return cmd_annotate_serve(as_tasks, as_store, as_mode, as_opts, as_tokens, out);
    };
  });

  // cost
  auto* co = app.add_subcommand("cost", "LLM versus human annotation cost");
  double co_n = 0;
  stats::CostModel co_model;
  co->add_option("--n", co_n, "Number of segments")->required()->check(CLI::NonNegativeNumber);
  co->add_option("--tokens-in", co_model.tokens_in_per_example, "Input tokens per segment")->capture_default_str();
  co->add_option("--tokens-out", co_model.tokens_out_per_example, "Output tokens per segment")->capture_default_str();
  co->add_option("--price-in", co_model.price_in_per_million, "USD per million input tokens")->capture_default_str();
  co->add_option("--price-out", co_model.price_out_per_million, "USD per million output tokens")
      ->capture_default_str();
  co->add_option("--human-minutes-per-50", co_model.human_minutes_per_50, "Annotator minutes per 50 segments")
      ->capture_default_str();
  co->add_option("--hourly-rate", co_model.human_hourly_rate, "Annotator USD per hour")->capture_default_str();
  co->callback([&] { action = [&] { return cmd_cost(co_n, co_model, out); }; });

  // report
  auto* rp = app.add_subcommand("report", "Aggregate runs into a model x dataset report");
  std::string rp_runs, rp_format = "csv", rp_out;
  rp->add_option("--runs", rp_runs, "Runs directory")->required()->check(CLI::ExistingDirectory);
  rp->add_option("--format", rp_format, "csv, md or json")
      ->check(CLI::IsMember({"csv", "md", "json"}))
      ->capture_default_str();
  rp->add_option("--out", rp_out, "Output file (default: stdout)");
  rp->callback([&] { action = [&] { return cmd_report(rp_runs, rp_format, rp_out, out); }; });

  // confidence
  auto* cf = app.add_subcommand("confidence", "Verbalized confidence summary per class");
  std::string cf_labels, cf_gran = "fine";
  cf->add_option("--labels", cf_labels, "Label JSONL")->required()->check(CLI::ExistingFile);
  cf->add_option("--granularity", cf_gran, "coarse or fine")
      ->check(CLI::IsMember({"coarse", "fine"}))
      ->capture_default_str();
  cf->callback([&] { action = [&] { return cmd_confidence(cf_labels, cf_gran, out); }; });

  // transitions
  auto* tr = app.add_subcommand("transitions", "Label transitions between normalized and orthographic judging");
  std::string tr_norm, tr_orth, tr_gran = "coarse";
  tr->add_option("--normalized", tr_norm, "Labels judged on normalized text")->required()->check(CLI::ExistingFile);
  tr->add_option("--orthographic", tr_orth, "Labels judged on orthographic text")
      ->required()
      ->check(CLI::ExistingFile);
  tr->add_option("--granularity", tr_gran, "coarse or fine")
      ->check(CLI::IsMember({"coarse", "fine"}))
      ->capture_default_str();
  tr->callback([&] { action = [&] { return cmd_transitions(tr_norm, tr_orth, tr_gran, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().back(); sub) {
      err << "run 'hereval " << sub->get_name() << " --help' for usage\n";
    }
    return kExitValidation;
  }

  // A subcommand asked for --help returns through CallForHelp above, so by
  // here exactly one action is set.
  try {
    if (!action) throw ValidationError("no subcommand given");
    return action();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace hereval::cli
