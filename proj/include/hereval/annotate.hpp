// include/hereval/annotate.hpp

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

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "hereval/corpus.hpp"
#include "hereval/error.hpp"
#include "hereval/taxonomy.hpp"

namespace hereval::annotate {

struct AnnotationResponse {
  std::string task_id;
  std::string annotator_id;
  AnyLabel label = CoarseLabel::NoError;
  UtcTime submitted_at{};
};

/// Service-level failure carrying a machine-readable code and the HTTP status
/// it maps to.
class ServiceError : public Error {
 public:
  ServiceError(std::string code, int http_status, const std::string& message)
      : Error(message), code_(std::move(code)), http_status_(http_status) {}
  const std::string& code() const { return code_; }
  int http_status() const { return http_status_; }

 private:
  std::string code_;
  int http_status_;
};

enum class SubmitOutcome { Accepted, Duplicate };

struct AnnotatorProgress {
  std::size_t answered = 0;
  std::size_t assigned = 0;
};

struct Progress {
  std::size_t answered = 0;
  std::size_t total = 0;  // task x annotator assignments
  std::map<std::string, AnnotatorProgress> annotators;
};

/// What an annotator is shown: texts only, no provenance.
struct TaskView {
  std::string task_id;
  std::string reference;
  std::string hypothesis;
  std::size_t position = 0;  // 1-based index of this task for the annotator
  std::size_t total = 0;
};

/// Tasks plus an append-only JSONL response log replayed on construction.
/// Writers are serialized; readers take an immutable snapshot.
class AnnotationStore {
 public:
  using Clock = std::function<UtcTime()>;

  AnnotationStore(std::vector<corpus::AnnotationTask> tasks, std::optional<std::filesystem::path> log_path,
                  Granularity mode = Granularity::Coarse, Clock clock = {});

  Granularity mode() const { return mode_; }
  bool knows_annotator(const std::string& annotator_id) const;

  /// First unanswered task in this annotator's fixed task order.
  std::optional<TaskView> next_task(const std::string& annotator_id) const;

  /// submitted_at is filled from the clock when zero.
  SubmitOutcome submit(AnnotationResponse response);

  Progress progress() const;

  /// All responses as human labels, sorted by (task_id, annotator_id).
  std::vector<ErrorLabel> export_labels() const;
  std::string export_jsonl() const;

 private:
  struct State {
    std::map<std::pair<std::string, std::string>, AnnotationResponse> responses;
  };

  void check(const AnnotationResponse& r) const;
  SubmitOutcome apply(State& state, const AnnotationResponse& r) const;
  std::shared_ptr<const State> snapshot() const;

  std::vector<corpus::AnnotationTask> tasks_;
  std::map<std::string, std::size_t> task_index_;
  std::map<std::string, std::vector<std::size_t>> assignments_;
  std::optional<std::filesystem::path> log_path_;
  Granularity mode_;
  Clock clock_;
  std::mutex write_mu_;
  std::shared_ptr<const State> state_;
};

/// annotator id -> opaque token. JSON object on disk.
using TokenMap = std::map<std::string, std::string>;
TokenMap load_tokens(const std::filesystem::path& path);

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> ui_dir;
  TokenMap tokens;  // empty: no authentication
};

/// HTTP front end. Endpoints: GET /api/tasks/next?annotator=ID,
/// POST /api/labels, GET /api/progress, GET /api/export; static UI at /.
class Server {
 public:
  Server(AnnotationStore& store, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Bind and serve on a background thread; returns the bound port.
  int start();
  /// Bind and serve on the calling thread until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Built-in single-page UI used when no ui_dir is configured.
std::string_view builtin_ui_html();

}  // namespace hereval::annotate
