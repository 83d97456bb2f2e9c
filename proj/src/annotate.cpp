// src/annotate.cpp

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

#include "hereval/annotate.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

namespace hereval::annotate {
namespace {

using ojson = nlohmann::ordered_json;

std::string response_line(const AnnotationResponse& r) {
  ojson j;
  j["task_id"] = r.task_id;
  j["annotator_id"] = r.annotator_id;
  j["granularity"] = std::string(to_string(granularity_of(r.label)));
  j["label"] = std::string(label_string(r.label));
  j["submitted_at"] = format_rfc3339(r.submitted_at);
  return j.dump();
}

AnnotationResponse parse_response(const nlohmann::json& j, Granularity mode) {
  AnnotationResponse r;
  r.task_id = j.at("task_id").get<std::string>();
  r.annotator_id = j.at("annotator_id").get<std::string>();
  const auto text = j.at("label").get<std::string>();
  const auto label = parse_label(text, mode);
  if (!label) {
    throw ServiceError("invalid_label", 400,
                       fmt::format("'{}' is not a {} label", text, to_string(mode)));
  }
  r.label = *label;
  if (j.contains("submitted_at") && !j["submitted_at"].is_null()) {
    const auto ts = parse_rfc3339(j["submitted_at"].get<std::string>());
    if (!ts) throw ServiceError("invalid_timestamp", 400, "submitted_at is not an RFC 3339 UTC instant");
    r.submitted_at = *ts;
  }
  return r;
}

void append_durably(const std::filesystem::path& path, const std::string& line) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(fmt::format("cannot open {}: {}", path.string(), std::strerror(errno)));
  const std::string data = line + "\n";
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw Error(fmt::format("write to {} failed: {}", path.string(), std::strerror(errno)));
    }
    done += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

}  // namespace

// ---------------------------------------------------------------------------
// Store

AnnotationStore::AnnotationStore(std::vector<corpus::AnnotationTask> tasks,
                                 std::optional<std::filesystem::path> log_path, Granularity mode, Clock clock)
    : tasks_(std::move(tasks)), log_path_(std::move(log_path)), mode_(mode), clock_(std::move(clock)) {
  if (!clock_) {
    clock_ = [] { return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now()); };
  }
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    const auto& t = tasks_[i];
    if (!task_index_.emplace(t.task_id, i).second) {
      throw ValidationError("duplicate task_id '" + t.task_id + "'");
    }
    if (t.annotators[0] == t.annotators[1]) {
      throw ValidationError("task '" + t.task_id + "' needs two distinct annotators");
    }
    for (const auto& a : t.annotators) assignments_[a].push_back(i);
  }

  auto state = std::make_shared<State>();
  if (log_path_ && std::filesystem::exists(*log_path_)) {
    std::ifstream in(*log_path_, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    std::size_t pos = 0, lineno = 0;
    while (pos < text.size()) {
      const std::size_t start = pos;
      std::size_t end = text.find('\n', pos);
      const bool terminated = end != std::string::npos;
      if (!terminated) end = text.size();
      const std::string line = text.substr(pos, end - pos);
      pos = end + 1;
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        auto g = parse_granularity(j.value("granularity", std::string(to_string(mode_))));
        if (!g || *g != mode_) throw ValidationError("granularity does not match the store mode");
        auto r = parse_response(j, mode_);
        if (r.submitted_at == UtcTime{}) throw ValidationError("missing submitted_at");
        check(r);
        apply(*state, r);
        if (!terminated) {
          std::ofstream(*log_path_, std::ios::binary | std::ios::app) << '\n';
        }
      } catch (const std::exception& e) {
        if (!terminated) {
          // A crash mid-append leaves one unterminated line; nothing was acked for it.
          std::cerr << fmt::format("{}: dropping truncated final line\n", log_path_->string());
          std::filesystem::resize_file(*log_path_, start);
          break;
        }
        throw ValidationError(fmt::format("{}: line {}: {}", log_path_->string(), lineno, e.what()));
      }
    }
  }
  state_ = std::move(state);
}

bool AnnotationStore::knows_annotator(const std::string& annotator_id) const {
  return assignments_.count(annotator_id) > 0;
}

std::shared_ptr<const AnnotationStore::State> AnnotationStore::snapshot() const { return std::atomic_load(&state_); }

void AnnotationStore::check(const AnnotationResponse& r) const {
  if (!knows_annotator(r.annotator_id)) {
    throw ServiceError("unknown_annotator", 404, "annotator '" + r.annotator_id + "' is not in the pool");
  }
  const auto it = task_index_.find(r.task_id);
  if (it == task_index_.end()) throw ServiceError("unknown_task", 404, "task '" + r.task_id + "' does not exist");
  const auto& t = tasks_[it->second];
  if (t.annotators[0] != r.annotator_id && t.annotators[1] != r.annotator_id) {
    throw ServiceError("not_assigned", 403,
                       "annotator '" + r.annotator_id + "' is not assigned to task '" + r.task_id + "'");
  }
  if (granularity_of(r.label) != mode_) {
    throw ServiceError("invalid_label", 400, "label granularity does not match the store mode");
  }
}

SubmitOutcome AnnotationStore::apply(State& state, const AnnotationResponse& r) const {
  const auto key = std::make_pair(r.task_id, r.annotator_id);
  const auto it = state.responses.find(key);
  if (it != state.responses.end()) {
    if (it->second.label == r.label) return SubmitOutcome::Duplicate;
    throw ServiceError("conflict", 409,
                       fmt::format("task '{}' already answered by '{}' with '{}'", r.task_id, r.annotator_id,
                                   label_string(it->second.label)));
  }
  state.responses.emplace(key, r);
  return SubmitOutcome::Accepted;
}

std::optional<TaskView> AnnotationStore::next_task(const std::string& annotator_id) const {
  const auto it = assignments_.find(annotator_id);
  if (it == assignments_.end()) {
    throw ServiceError("unknown_annotator", 404, "annotator '" + annotator_id + "' is not in the pool");
  }
  const auto state = snapshot();
  const auto& mine = it->second;
  for (std::size_t k = 0; k < mine.size(); ++k) {
    const auto& t = tasks_[mine[k]];
    if (state->responses.count({t.task_id, annotator_id})) continue;
    return TaskView{t.task_id, t.reference, t.hypothesis, k + 1, mine.size()};
  }
  return std::nullopt;
}

SubmitOutcome AnnotationStore::submit(AnnotationResponse response) {
  check(response);
  std::lock_guard lock(write_mu_);
  auto next = std::make_shared<State>(*snapshot());
  if (response.submitted_at == UtcTime{}) response.submitted_at = clock_();
  const auto outcome = apply(*next, response);
  if (outcome == SubmitOutcome::Duplicate) return outcome;
  if (log_path_) append_durably(*log_path_, response_line(response));
  std::atomic_store(&state_, std::shared_ptr<const State>(std::move(next)));
  return outcome;
}

Progress AnnotationStore::progress() const {
  const auto state = snapshot();
  Progress p;
  for (const auto& [id, idx] : assignments_) p.annotators[id].assigned = idx.size();
  p.total = tasks_.size() * 2;
  for (const auto& [key, r] : state->responses) {
    ++p.annotators[key.second].answered;
    ++p.answered;
  }
  return p;
}

std::vector<ErrorLabel> AnnotationStore::export_labels() const {
  const auto state = snapshot();
  std::vector<ErrorLabel> out;
  out.reserve(state->responses.size());
  for (const auto& [key, r] : state->responses) {
    ErrorLabel l;
    l.sample_id = r.task_id;
    l.label = r.label;
    l.source = LabelSource::Human;
    l.annotator_id = r.annotator_id;
    l.timestamp = r.submitted_at;
    out.push_back(std::move(l));
  }
  return out;
}

std::string AnnotationStore::export_jsonl() const {
  std::string out;
  for (const auto& l : export_labels()) out += corpus::to_jsonl(l) + "\n";
  return out;
}

TokenMap load_tokens(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open token file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError(path.string() + ": expected an object of annotator -> token");
  TokenMap out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string() || v.get<std::string>().empty()) {
      throw ValidationError(path.string() + ": token for '" + k + "' must be a non-empty string");
    }
    out[k] = v.get<std::string>();
  }
  return out;
}

// ---------------------------------------------------------------------------
// HTTP

struct Server::Impl {
  AnnotationStore& store;
  ServerOptions options;
  httplib::Server http;
  std::thread thread;
  int bound_port = -1;

  Impl(AnnotationStore& s, ServerOptions o) : store(s), options(std::move(o)) {}

  static void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
    res.status = status;
    res.set_content(ojson{{"error", code}, {"message", message}}.dump(), "application/json");
  }

  static std::optional<std::string> presented_token(const httplib::Request& req) {
    if (req.has_header("X-Annotator-Token")) return req.get_header_value("X-Annotator-Token");
    const auto auth = req.get_header_value("Authorization");
    if (auth.rfind("Bearer ", 0) == 0) return auth.substr(7);
    return std::nullopt;
  }

  // Token auth: with an annotator id, the token must belong to that annotator;
  // without one, any pool token is accepted.
  void authorize(const httplib::Request& req, const std::string* annotator) const {
    if (options.tokens.empty()) return;
    const auto token = presented_token(req);
    if (!token) throw ServiceError("unauthorized", 401, "missing annotator token");
    if (annotator) {
      const auto it = options.tokens.find(*annotator);
      if (it == options.tokens.end() || it->second != *token) {
        throw ServiceError("unauthorized", 401, "token does not match annotator '" + *annotator + "'");
      }
      return;
    }
    for (const auto& [id, t] : options.tokens) {
      if (t == *token) return;
    }
    throw ServiceError("unauthorized", 401, "unknown token");
  }

  template <typename F>
  httplib::Server::Handler guarded(F f) {
    return [this, f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const ServiceError& e) {
        send_error(res, e.http_status(), e.code(), e.what());
      } catch (const nlohmann::json::exception& e) {
        send_error(res, 400, "bad_request", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  void routes() {
    http.Get("/api/tasks/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
      if (!req.has_param("annotator")) throw ServiceError("bad_request", 400, "missing annotator parameter");
      const auto annotator = req.get_param_value("annotator");
      authorize(req, &annotator);
      const auto view = store.next_task(annotator);
      const auto p = store.progress().annotators.at(annotator);
      ojson j;
      j["mode"] = std::string(to_string(store.mode()));
      j["answered"] = p.answered;
      j["assigned"] = p.assigned;
      if (view) {
        j["task"] = {{"task_id", view->task_id},
                     {"reference", view->reference},
                     {"hypothesis", view->hypothesis},
                     {"position", view->position},
                     {"total", view->total}};
      } else {
        j["task"] = nullptr;
      }
      res.set_content(j.dump(), "application/json");
    }));

    http.Post("/api/labels", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      if (!body.is_object()) throw ServiceError("bad_request", 400, "body must be a JSON object");
      auto r = parse_response(body, store.mode());
      authorize(req, &r.annotator_id);
      const auto outcome = store.submit(r);
      const auto p = store.progress().annotators.at(r.annotator_id);
      ojson j;
      j["status"] = outcome == SubmitOutcome::Accepted ? "accepted" : "duplicate";
      j["answered"] = p.answered;
      j["assigned"] = p.assigned;
      res.status = outcome == SubmitOutcome::Accepted ? 201 : 200;
      res.set_content(j.dump(), "application/json");
    }));

    http.Get("/api/progress", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto p = store.progress();
      ojson j;
      if (req.has_param("annotator")) {
        const auto annotator = req.get_param_value("annotator");
        authorize(req, &annotator);
        const auto it = p.annotators.find(annotator);
        if (it == p.annotators.end()) {
          throw ServiceError("unknown_annotator", 404, "annotator '" + annotator + "' is not in the pool");
        }
        j["annotator"] = annotator;
        j["answered"] = it->second.answered;
        j["assigned"] = it->second.assigned;
      } else {
        authorize(req, nullptr);
        j["answered"] = p.answered;
        j["total"] = p.total;
        ojson per = ojson::object();
        for (const auto& [id, ap] : p.annotators) per[id] = {{"answered", ap.answered}, {"assigned", ap.assigned}};
        j["annotators"] = per;
      }
      res.set_content(j.dump(), "application/json");
    }));

    http.Get("/api/export", guarded([this](const httplib::Request& req, httplib::Response& res) {
      authorize(req, nullptr);
      res.set_content(store.export_jsonl(), "application/x-ndjson");
    }));

    if (options.ui_dir) {
      if (!http.set_mount_point("/", options.ui_dir->string())) {
        throw ValidationError("UI directory not found: " + options.ui_dir->string());
      }
    } else {
      http.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(std::string(builtin_ui_html()), "text/html; charset=utf-8");
      });
    }
  }

  int bind() {
    bound_port = options.port == 0 ? http.bind_to_any_port(options.host)
                                   : (http.bind_to_port(options.host, options.port) ? options.port : -1);
    if (bound_port < 0) {
      throw Error(fmt::format("cannot bind {}:{}", options.host, options.port));
    }
    return bound_port;
  }
};

Server::Server(AnnotationStore& store, ServerOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {
  impl_->routes();
}

Server::~Server() { stop(); }

int Server::start() {
  const int port = impl_->bind();
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return port;
}

void Server::run() {
  impl_->bind();
  impl_->http.listen_after_bind();
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string_view builtin_ui_html() {
  return R"HTML(<!doctype html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>Transcript error annotation</title>
<style>
body { font-family: sans-serif; max-width: 52rem; margin: 2rem auto; }
.pair { border: 1px solid #ccc; padding: 1rem; margin: 1rem 0; }
.pair p { font-size: 1.2rem; }
button { margin: 0.25rem; padding: 0.5rem 1rem; }
#error { color: #b00; }
</style>
</head>
<body>
<div id="login">
  <label>Annotator <input id="annotator"></label>
  <label>Token <input id="token" type="password"></label>
  <button id="go">Start</button>
</div>
<div id="work" hidden>
  <div id="progress"></div>
  <div class="pair">
    <div>Ground truth</div><p id="ref"></p>
    <div>Generated output</div><p id="hyp"></p>
  </div>
  <div id="choices"></div>
</div>
<div id="error"></div>
<script>
const LABELS = {
  coarse: ["Hallucination Error", "Non-Hallucination Error", "No Error"],
  fine: ["Hallucination Error", "Language Error", "Oscillation Error", "Phonetic Error", "No Error"],
};
let annotator = sessionStorage.getItem("annotator");
let token = sessionStorage.getItem("token");
let current = null, labels = [], blocked = false;
const $ = (id) => document.getElementById(id);
function headers() {
  const h = { "Content-Type": "application/json" };
  if (token) h["Authorization"] = "Bearer " + token;
  return h;
}
async function load() {
  const r = await fetch("/api/tasks/next?annotator=" + encodeURIComponent(annotator), { headers: headers() });
  const j = await r.json();
  if (!r.ok) { $("error").textContent = j.message; return; }
  $("login").hidden = true; $("work").hidden = false;
  labels = LABELS[j.mode];
  current = j.task;
  $("progress").textContent = j.answered + " of " + j.assigned;
  if (!current) { $("ref").textContent = ""; $("hyp").textContent = ""; $("choices").textContent = "All tasks done."; return; }
  $("ref").textContent = current.reference;
  $("hyp").textContent = current.hypothesis;
  $("choices").replaceChildren(...labels.map((l, i) => {
    const b = document.createElement("button");
    b.textContent = (i + 1) + ". " + l;
    b.onclick = () => submit(l);
    return b;
  }));
}
async function submit(label) {
  if (!current || blocked) return;
  try {
    const r = await fetch("/api/labels", { method: "POST", headers: headers(),
      body: JSON.stringify({ task_id: current.task_id, annotator_id: annotator, label }) });
    const j = await r.json();
    if (r.status === 409) { blocked = true; $("error").textContent = j.message + " Reload the page."; return; }
    if (!r.ok) { $("error").textContent = j.message; return; }
    $("error").textContent = "";
    load();
  } catch (e) {
    $("error").textContent = "Network error, press the label again to retry.";
  }
}
document.addEventListener("keydown", (e) => {
  const k = parseInt(e.key, 10);
  if (k >= 1 && k <= labels.length) submit(labels[k - 1]);
});
$("go").onclick = () => {
  annotator = $("annotator").value.trim(); token = $("token").value.trim();
  sessionStorage.setItem("annotator", annotator); sessionStorage.setItem("token", token);
  load();
};
if (annotator) load();
</script>
</body>
</html>
)HTML";
}

}  // namespace hereval::annotate
