// tests/test_cli.cpp

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

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "hereval/audio.hpp"
#include "hereval/cli.hpp"
#include "hereval/corpus.hpp"
#include "hereval/shift.hpp"
#include "synthetic.hpp"

using namespace hereval;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("hereval_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Runs the installed binary through the shell; `env` is prepended verbatim.
Result exec(const std::string& args, const std::string& env = "SOURCE_DATE_EPOCH=1700000000") {
  const auto dir = fs::temp_directory_path();
  const auto o = dir / "hereval_cli_stdout", e = dir / "hereval_cli_stderr";
  const std::string cmd = "env -u HEREVAL_LLM_URL -u HEREVAL_LLM_API_KEY " + env + " '" HEREVAL_CLI "' " + args +
                          " >'" + o.string() + "' 2>'" + e.string() + "'";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

// In-process entry point.
Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string line_with(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) return line;
  }
  return {};
}

const std::string kGolden = HEREVAL_FIXTURES "/golden_rows.jsonl";

}  // namespace

TEST_CASE("help and usage errors") {
  auto r = exec("--help");
  CHECK(r.code == 0);
  for (const auto* sub : {"evaluate", "judge", "heuristic", "shift", "perturb", "agreement", "annotate", "cost",
                          "report", "confidence", "transitions"}) {
    CHECK(r.out.find(sub) != std::string::npos);
    const auto h = exec(std::string(sub) + " --help");
    CHECK_MESSAGE(h.code == 0, sub);
    CHECK(h.out.find("Usage") != std::string::npos);
  }
  CHECK(exec("annotate build --help").code == 0);
  CHECK(exec("annotate serve --help").code == 0);
  CHECK(exec("").code == 1);
  CHECK(exec("frobnicate").code == 1);
  CHECK(exec("cost").code == 1);
  CHECK(exec("evaluate --manifest /does/not/exist.jsonl").code == 1);
}

TEST_CASE("cost") {
  const auto r = exec("cost --n 1000000");
  REQUIRE(r.code == 0);
  CHECK(line_with(r.out, "llm_cost ") == "llm_cost 78.00");
  CHECK(line_with(r.out, "human_cost ") == "human_cost 33333.33");
  CHECK(line_with(r.out, "ratio ") == "ratio 427.35");
}

TEST_CASE("evaluate with the mock judge") {
  const auto runs = scratch("eval");
  const auto r = exec("evaluate --manifest " + kGolden + " --mock-judge --out " + runs.string() + " --run-id t1");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.rfind("model,dataset,wer,cer,her_coarse,her_fine,her_wer_ratio,n\n", 0) == 0);
  CHECK(line_with(r.out, "# overall").find("her_coarse=0.875000") != std::string::npos);
  CHECK(fs::exists(runs / "t1" / "report.csv"));
  const auto meta = nlohmann::json::parse(slurp(runs / "t1" / "meta.json"));
  CHECK(meta.contains("manifest_sha256"));

  const auto labels = corpus::load_labels(runs / "t1" / "labels.jsonl");
  std::size_t he = 0, llm = 0;
  for (const auto& l : labels) {
    if (l.source != LabelSource::Llm) continue;
    ++llm;
    if (is_hallucination(l.label)) ++he;
  }
  CHECK(llm == 8);
  CHECK(he == 7);

  // Without a key, the live judge refuses to start.
  const auto live = exec("evaluate --manifest " + kGolden + " --out " + runs.string());
  CHECK(live.code == 1);
  CHECK(live.err.find("HEREVAL_LLM_API_KEY") != std::string::npos);

  const auto rep = exec("report --runs " + runs.string() + " --format md");
  CHECK(rep.code == 0);
  CHECK(rep.out.find("WER/HER") != std::string::npos);
}

TEST_CASE("evaluate is byte deterministic") {
  const auto manifest = scratch("det") / "m.jsonl";
  corpus::write_manifest(manifest, testing::synthetic_pool(100, 42));
  const auto a = scratch("det_a"), b = scratch("det_b");
  const auto ra = exec("evaluate --manifest " + manifest.string() + " --mock-judge --judge both --out " + a.string());
  const auto rb = exec("evaluate --manifest " + manifest.string() + " --mock-judge --judge both --out " + b.string());
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  CHECK(ra.out.substr(0, ra.out.find("# run")) == rb.out.substr(0, rb.out.find("# run")));
  for (const auto& e : fs::directory_iterator(a)) {
    if (!e.is_directory()) continue;
    for (const char* f : {"report.csv", "labels.jsonl", "samples.jsonl", "meta.json"}) {
      CHECK(slurp(e.path() / f) == slurp(b / e.path().filename() / f));
    }
  }
}

TEST_CASE("judge, heuristic and agreement subcommands") {
  const auto dir = scratch("labels");
  const auto coarse = dir / "coarse.jsonl";
  auto r = exec("judge --manifest " + kGolden + " --mock-judge --confidence --out " + coarse.string());
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(corpus::load_labels(coarse).size() == 8);

  r = exec("heuristic --manifest " + kGolden + " --out " + (dir / "heur.jsonl").string());
  REQUIRE(r.code == 0);
  const auto heur = corpus::load_labels(dir / "heur.jsonl");
  REQUIRE(heur.size() == 8);
  for (const auto& l : heur) CHECK(l.source == LabelSource::Heuristic);

  r = exec("agreement --labels " + coarse.string() + " --labels " + coarse.string() + " --bootstrap 50");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("1.0000") != std::string::npos);

  r = exec("agreement --labels " + coarse.string() + " --labels " + (dir / "heur.jsonl").string() +
           " --project binary --bootstrap 50");
  CHECK(r.code == 0);

  r = exec("confidence --granularity coarse --labels " + coarse.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("Hallucination Error") != std::string::npos);

  r = exec("transitions --normalized " + coarse.string() + " --orthographic " + coarse.string());
  CHECK(r.code == 0);
}

TEST_CASE("perturb is deterministic and records provenance") {
  const auto in = scratch("pt_in");
  fs::create_directories(in / "nested");
  audio::AudioBuffer a;
  for (int i = 0; i < 8000; ++i) a.samples.push_back(0.3f * static_cast<float>(std::sin(i * 0.05)));
  audio::write_wav(in / "a.wav", a, audio::WavFormat::Pcm16);
  audio::write_wav(in / "nested" / "b.wav", a);
  const auto o1 = scratch("pt_o1"), o2 = scratch("pt_o2");
  for (const auto& o : {o1, o2}) {
    const auto r = exec("perturb --in " + in.string() + " --out " + o.string() + " --kind white_noise --snr 10 --seed 3");
    REQUIRE_MESSAGE(r.code == 0, r.err);
  }
  for (const char* f : {"a.wav", "nested/b.wav"}) {
    REQUIRE(fs::exists(o1 / f));
    CHECK(slurp(o1 / f) == slurp(o2 / f));
  }
  auto m2 = slurp(o2 / "perturbations.jsonl");
  for (auto p = m2.find(o2.string()); p != std::string::npos; p = m2.find(o2.string(), p)) {
    m2.replace(p, o2.string().size(), o1.string());
  }
  CHECK(slurp(o1 / "perturbations.jsonl") == m2);
  CHECK(slurp(o1 / "a.wav") != slurp(o1 / "nested" / "b.wav"));
  std::istringstream manifest(slurp(o1 / "perturbations.jsonl"));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(manifest, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("source_path"));
    CHECK(j.contains("output_path"));
    CHECK(j["spec"]["kind"] == "white_noise");
    CHECK(j.contains("seed"));
    ++rows;
  }
  CHECK(rows == 2);
  CHECK(exec("perturb --in " + in.string() + " --out " + o1.string() + " --kind reverb").code == 1);
}

TEST_CASE("annotate build") {
  const auto dir = scratch("annotate");
  corpus::write_manifest(dir / "pool.jsonl", testing::synthetic_pool(400, 8, 20, false));
  const auto r = run({"annotate", "build", "--manifest", (dir / "pool.jsonl").string(), "--out",
                      (dir / "tasks.jsonl").string(), "--n-total", "40", "--n-synthetic", "4", "--annotators", "4"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(corpus::load_tasks(dir / "tasks.jsonl").size() == 40);
  const auto big = run({"annotate", "build", "--manifest", (dir / "pool.jsonl").string(), "--out",
                        (dir / "t2.jsonl").string(), "--n-total", "5000"});
  CHECK(big.code == 1);
  CHECK(big.err.find("shortfall") != std::string::npos);
}

TEST_CASE("shift end to end") {
  const auto dir = scratch("shift");
  auto pool = testing::synthetic_pool(240, 5);
  for (auto& s : pool) s.model = "m";
  corpus::write_manifest(dir / "m.jsonl", pool);
  REQUIRE(run({"evaluate", "--manifest", (dir / "m.jsonl").string(), "--mock-judge", "--out", (dir / "runs").string(),
               "--timestamp", "2025-01-01T00:00:00Z"})
              .code == 0);
  std::mt19937_64 rng(1);
  std::normal_distribution<float> n01;
  double offset = 0.0;
  for (const auto* d : {"librispeech", "commonvoice", "tedlium"}) {
    shift::EmbeddingMatrix m;
    m.domain = d;
    for (int l = 0; l < 2; ++l) {
      shift::EmbeddingLayer layer;
      layer.dim = 4;
      for (int i = 0; i < 40; ++i) layer.data.push_back(n01(rng) + static_cast<float>(offset));
      m.layers.push_back(layer);
    }
    shift::save_embedding(m, dir / "emb");
    offset += 1.0;
  }
  const auto r = run({"shift", "--embeddings", (dir / "emb").string(), "--reports", (dir / "runs").string(),
                      "--source", "librispeech", "--out", (dir / "shift.json").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto j = nlohmann::json::parse(slurp(dir / "shift.json"));
  CHECK(j["rows"].size() == 2);
  CHECK(run({"shift", "--embeddings", (dir / "emb").string(), "--reports", (dir / "runs").string(), "--source",
             "nowhere"})
            .code == 1);
}
