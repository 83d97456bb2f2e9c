// tests/test_annotate.cpp

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

#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "hereval/annotate.hpp"
#include "hereval/corpus.hpp"
#include "hereval/stats.hpp"
#include "synthetic.hpp"

using namespace hereval;
using annotate::AnnotationResponse;
using annotate::AnnotationStore;
using annotate::ServiceError;
namespace fs = std::filesystem;

namespace {

const UtcTime kT = *parse_rfc3339("2025-05-05T10:00:00Z");

std::vector<corpus::AnnotationTask> small_tasks(std::size_t n_total = 20, std::size_t n_annotators = 4) {
  static const auto pool = testing::synthetic_pool(3000, 77, 20, false);
  corpus::AnnotationParams p;
  p.n_total = n_total;
  p.n_synthetic = n_total / 10;
  p.annotators = corpus::AnnotationParams::default_annotators(n_annotators);
  p.seed = 1;
  return corpus::build_annotation_set(pool, p);
}

fs::path scratch_log(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("hereval_annotate_" + name + ".jsonl");
  fs::remove(p);
  return p;
}

AnnotationStore::Clock fixed_clock() {
  return [] { return kT; };
}

ServiceError capture(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e;
  }
  FAIL("expected ServiceError");
  return ServiceError("", 0, "");
}

}  // namespace

TEST_CASE("annotators walk their own task order") {
  const auto tasks = small_tasks();
  AnnotationStore store(tasks, std::nullopt, Granularity::Coarse, fixed_clock());
  const std::string a = "annotator-01";
  auto first = store.next_task(a);
  REQUIRE(first);
  CHECK(first->position == 1);
  CHECK(first->total == 10);
  CHECK(store.next_task(a)->task_id == first->task_id);
  CHECK(store.submit({first->task_id, a, CoarseLabel::NoError, {}}) == annotate::SubmitOutcome::Accepted);
  const auto second = store.next_task(a);
  REQUIRE(second);
  CHECK(second->task_id != first->task_id);
  CHECK(second->position == 2);
  for (std::size_t i = 0; i < 9; ++i) {
    const auto t = store.next_task(a);
    REQUIRE(t);
    store.submit({t->task_id, a, CoarseLabel::HallucinationError, {}});
  }
  CHECK_FALSE(store.next_task(a));
  CHECK(store.progress().annotators.at(a).answered == 10);
  CHECK_FALSE(store.knows_annotator("nobody"));
  CHECK_THROWS_AS(store.next_task("nobody"), ServiceError);
}

TEST_CASE("submission rules") {
  const auto tasks = small_tasks();
  AnnotationStore store(tasks, std::nullopt, Granularity::Coarse, fixed_clock());
  const auto& t = tasks[0];
  const auto a = t.annotators[0];
  CHECK(store.submit({t.task_id, a, CoarseLabel::NoError, {}}) == annotate::SubmitOutcome::Accepted);
  CHECK(store.submit({t.task_id, a, CoarseLabel::NoError, {}}) == annotate::SubmitOutcome::Duplicate);
  CHECK(capture([&] { store.submit({t.task_id, a, CoarseLabel::HallucinationError, {}}); }).http_status() == 409);

  std::string outsider;
  for (const auto& id : corpus::AnnotationParams::default_annotators(4)) {
    if (id != t.annotators[0] && id != t.annotators[1]) outsider = id;
  }
  const auto e1 = capture([&] { store.submit({t.task_id, outsider, CoarseLabel::NoError, {}}); });
  CHECK(e1.code() == "not_assigned");
  CHECK(e1.http_status() == 403);
  const auto e2 = capture([&] { store.submit({"task-9999", a, CoarseLabel::NoError, {}}); });
  CHECK(e2.code() == "unknown_task");
  CHECK(e2.http_status() == 404);
  const auto e3 = capture([&] { store.submit({t.task_id, "ghost", CoarseLabel::NoError, {}}); });
  CHECK(e3.code() == "unknown_annotator");
  const auto e4 = capture([&] { store.submit({t.task_id, t.annotators[1], FineLabel::PhoneticError, {}}); });
  CHECK(e4.code() == "invalid_label");
  CHECK(e4.http_status() == 400);
  CHECK(store.progress().answered == 1);
}

TEST_CASE("responses survive a restart") {
  const auto tasks = small_tasks();
  const auto log = scratch_log("restart");
  {
    AnnotationStore store(tasks, log, Granularity::Fine, fixed_clock());
    for (std::size_t i = 0; i < 5; ++i) {
      store.submit({tasks[i].task_id, tasks[i].annotators[0], FineLabel::LanguageError, {}});
    }
  }
  // A crash mid-append leaves a torn final line.
  {
    std::ofstream out(log, std::ios::app);
    out << R"({"task_id":"task-00)";
  }
  AnnotationStore store(tasks, log, Granularity::Fine, fixed_clock());
  CHECK(store.progress().answered == 5);
  CHECK(store.submit({tasks[0].task_id, tasks[0].annotators[0], FineLabel::LanguageError, {}}) ==
        annotate::SubmitOutcome::Duplicate);
  store.submit({tasks[6].task_id, tasks[6].annotators[1], FineLabel::NoError, {}});
  AnnotationStore reread(tasks, log, Granularity::Fine, fixed_clock());
  CHECK(reread.progress().answered == 6);
  CHECK(reread.export_jsonl() == store.export_jsonl());

  // Corruption anywhere but the tail is fatal.
  const auto bad = scratch_log("corrupt");
  {
    std::ofstream out(bad);
    out << "garbage\n" << R"({"x":1})" << "\n";
  }
  CHECK_THROWS_AS(AnnotationStore(tasks, bad, Granularity::Fine, fixed_clock()), Error);
}

TEST_CASE("full protocol export feeds agreement") {
  const auto tasks = small_tasks(500, 20);
  AnnotationStore store(tasks, scratch_log("full"), Granularity::Coarse, fixed_clock());
  const auto total = store.progress().total;
  CHECK(total == 1000);
  std::size_t last = 0;
  std::vector<std::thread> writers;
  for (int w = 0; w < 4; ++w) {
    writers.emplace_back([&, w] {
      for (std::size_t i = w; i < tasks.size(); i += 4) {
        const auto label = kCoarseLabels[i % 3];
        for (const auto& a : tasks[i].annotators) store.submit({tasks[i].task_id, a, label, {}});
      }
    });
  }
  while (last < total) {
    const auto now = store.progress().answered;
    CHECK(now >= last);
    last = now;
    std::this_thread::yield();
  }
  for (auto& t : writers) t.join();

  const auto labels = store.export_labels();
  REQUIRE(labels.size() == 1000);
  for (std::size_t i = 1; i < labels.size(); ++i) {
    const auto prev = std::make_pair(labels[i - 1].sample_id, *labels[i - 1].annotator_id);
    CHECK(prev < std::make_pair(labels[i].sample_id, *labels[i].annotator_id));
  }
  CHECK(labels[0].source == LabelSource::Human);
  const auto parsed = corpus::parse_labels(store.export_jsonl());
  REQUIRE(parsed.size() == 1000);
  std::vector<stats::RatedLabel> rated;
  for (const auto& l : parsed) rated.push_back({l.sample_id, *l.annotator_id, std::string(label_string(l.label))});
  const auto h = stats::human_human_agreement(rated, 100, 0);
  CHECK(h.micro.raw_agreement == doctest::Approx(1.0));
  CHECK(h.micro.n == 500);
}

namespace {

struct Running {
  AnnotationStore store;
  annotate::Server server;
  httplib::Client client;

  Running(std::vector<corpus::AnnotationTask> tasks, annotate::TokenMap tokens)
      : store(std::move(tasks), std::nullopt, Granularity::Coarse, fixed_clock()),
        server(store, options(std::move(tokens))),
        client("127.0.0.1", server.start()) {}

  static annotate::ServerOptions options(annotate::TokenMap tokens) {
    annotate::ServerOptions o;
    o.port = 0;
    o.tokens = std::move(tokens);
    return o;
  }
};

}  // namespace

TEST_CASE("http api") {
  const auto tasks = small_tasks();
  Running r(tasks, {});
  const auto& t = tasks[0];
  const auto a = t.annotators[0];

  auto res = r.client.Get("/api/tasks/next?annotator=" + a);
  REQUIRE(res);
  CHECK(res->status == 200);
  auto j = nlohmann::json::parse(res->body);
  CHECK(j["mode"] == "coarse");
  CHECK(j["assigned"] == 10);
  const auto task = j["task"];
  std::set<std::string> keys;
  for (const auto& [k, v] : task.items()) keys.insert(k);
  CHECK(keys == std::set<std::string>{"task_id", "reference", "hypothesis", "position", "total"});
  const auto body = res->body;
  for (const auto& leak : {"is_synthetic", "model", "dataset", "sample_id", "wer"}) {
    CHECK(body.find(std::string("\"") + leak + "\"") == std::string::npos);
  }

  const nlohmann::json submit = {{"task_id", task["task_id"]}, {"annotator_id", a}, {"label", "No Error"}};
  res = r.client.Post("/api/labels", submit.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 201);
  CHECK(nlohmann::json::parse(res->body)["status"] == "accepted");
  res = r.client.Post("/api/labels", submit.dump(), "application/json");
  CHECK(res->status == 200);
  CHECK(nlohmann::json::parse(res->body)["status"] == "duplicate");

  auto conflict = submit;
  conflict["label"] = "Hallucination Error";
  res = r.client.Post("/api/labels", conflict.dump(), "application/json");
  CHECK(res->status == 409);
  CHECK(nlohmann::json::parse(res->body)["error"] == "conflict");

  auto invalid = submit;
  invalid["label"] = "Oscillation Error";
  CHECK(r.client.Post("/api/labels", invalid.dump(), "application/json")->status == 400);
  CHECK(r.client.Post("/api/labels", "{oops", "application/json")->status == 400);
  CHECK(r.client.Get("/api/tasks/next?annotator=ghost")->status == 404);

  res = r.client.Get("/api/progress");
  j = nlohmann::json::parse(res->body);
  CHECK(j["answered"] == 1);
  CHECK(j["total"] == 40);
  res = r.client.Get("/api/progress?annotator=" + a);
  CHECK(nlohmann::json::parse(res->body)["answered"] == 1);

  res = r.client.Get("/api/export");
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Content-Type") == "application/x-ndjson");
  const auto exported = corpus::parse_labels(res->body);
  REQUIRE(exported.size() == 1);
  CHECK(exported[0].annotator_id == a);

  res = r.client.Get("/");
  CHECK(res->status == 200);
  CHECK(res->body.find("/api/tasks/next") != std::string::npos);
  r.server.stop();
}

TEST_CASE("http token auth") {
  const auto tasks = small_tasks();
  annotate::TokenMap tokens;
  for (const auto& id : corpus::AnnotationParams::default_annotators(4)) tokens[id] = "tok-" + id;
  Running r(tasks, tokens);
  const auto a = tasks[0].annotators[0];
  CHECK(r.client.Get("/api/tasks/next?annotator=" + a)->status == 401);
  CHECK(r.client.Get("/api/tasks/next?annotator=" + a, {{"Authorization", "Bearer tok-nope"}})->status == 401);
  CHECK(r.client.Get("/api/tasks/next?annotator=" + a, {{"Authorization", "Bearer " + tokens[a]}})->status == 200);
  CHECK(r.client.Get("/api/tasks/next?annotator=" + a, {{"X-Annotator-Token", tokens[a]}})->status == 200);
  const auto other = tasks[0].annotators[1];
  CHECK(r.client.Get("/api/tasks/next?annotator=" + a, {{"X-Annotator-Token", tokens[other]}})->status == 401);
  const nlohmann::json submit = {{"task_id", tasks[0].task_id}, {"annotator_id", a}, {"label", "No Error"}};
  CHECK(r.client.Post("/api/labels", {{"X-Annotator-Token", tokens[other]}}, submit.dump(), "application/json")
            ->status == 401);
  CHECK(r.client.Post("/api/labels", {{"X-Annotator-Token", tokens[a]}}, submit.dump(), "application/json")->status ==
        201);
  CHECK(r.client.Get("/api/export")->status == 401);
  CHECK(r.client.Get("/api/export", {{"X-Annotator-Token", tokens[a]}})->status == 200);
  r.server.stop();
}

TEST_CASE("token files") {
  const auto p = fs::temp_directory_path() / "hereval_tokens.json";
  {
    std::ofstream out(p);
    out << R"({"annotator-01":"abc","annotator-02":"def"})";
  }
  const auto tokens = annotate::load_tokens(p);
  CHECK(tokens.size() == 2);
  CHECK(tokens.at("annotator-02") == "def");
  {
    std::ofstream out(p);
    out << R"(["abc"])";
  }
  CHECK_THROWS_AS(annotate::load_tokens(p), ValidationError);
}

TEST_CASE("an unterminated but complete final line is kept") {
  const auto tasks = small_tasks();
  const auto log = scratch_log("unterminated");
  {
    AnnotationStore store(tasks, log, Granularity::Coarse, fixed_clock());
    store.submit({tasks[0].task_id, tasks[0].annotators[0], CoarseLabel::NoError, {}});
  }
  fs::resize_file(log, fs::file_size(log) - 1);
  {
    AnnotationStore store(tasks, log, Granularity::Coarse, fixed_clock());
    CHECK(store.progress().answered == 1);
    store.submit({tasks[1].task_id, tasks[1].annotators[0], CoarseLabel::NoError, {}});
  }
  AnnotationStore store(tasks, log, Granularity::Coarse, fixed_clock());
  CHECK(store.progress().answered == 2);
}
