// src/judge.cpp

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

#include "hereval/judge.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <regex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "hereval/error.hpp"

namespace hereval::judge {
namespace {

constexpr std::string_view kGroundTruthMarker = "Ground Truth: \"";
constexpr std::string_view kOutputMarker = "\"\nGenerated Output: \"";
constexpr std::string_view kTailMarker = "\"\n\nOutput:";
constexpr std::string_view kFineMarker = "Classify the input into one of the five categories.";

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_trim_char(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '\'' || c == '`' || c == '.';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_trim_char(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_trim_char(s.back())) s.remove_suffix(1);
  return s;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string mock_rule(Granularity g, const std::string& reference, const std::string& hypothesis) {
  const auto ref = textnorm::normalize_english(reference);
  const auto hyp = textnorm::normalize_english(hypothesis);
  if (ref.tokens == hyp.tokens) return "No Error";
  const std::set<std::string> ref_words(ref.tokens.begin(), ref.tokens.end());
  const bool shared = std::any_of(hyp.tokens.begin(), hyp.tokens.end(),
                                  [&](const std::string& w) { return ref_words.count(w) > 0; });
  if (!shared) return "Hallucination Error";
  return g == Granularity::Coarse ? "Non-Hallucination Error" : "Phonetic Error";
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
  return out;
}

std::string template_hash(Granularity granularity) { return sha256_hex(prompt_template(granularity)); }

std::string build_prompt(Granularity granularity, const textnorm::NormalizedText& reference,
                         std::string_view hypothesis) {
  if (reference.empty()) throw ValidationError("build_prompt: empty reference");
  std::string body(prompt_template(granularity));
  // Placeholders appear exactly once each; substitute the hypothesis last so a
  // reference containing "{output}" is not rewritten.
  const auto gt = body.find("{ground_truth}");
  body.replace(gt, std::string_view("{ground_truth}").size(), reference.joined);
  const auto out = body.rfind("{output}");
  body.replace(out, std::string_view("{output}").size(), hypothesis);
  return body;
}

std::optional<AnyLabel> parse_verdict(std::string_view raw, Granularity granularity) {
  const std::string trimmed = ascii_lower(trim(raw));
  std::vector<std::pair<std::string, AnyLabel>> labels;
  if (granularity == Granularity::Coarse) {
    for (CoarseLabel l : kCoarseLabels) labels.emplace_back(ascii_lower(to_string(l)), l);
  } else {
    for (FineLabel l : kFineLabels) labels.emplace_back(ascii_lower(to_string(l)), l);
  }
  for (const auto& [text, label] : labels) {
    if (trimmed == text) return label;
  }

  // "hallucination error" is a substring of "non-hallucination error": mask
  // the longer form first so it is never double counted.
  std::string masked = trimmed;
  std::set<std::string_view> found;
  const std::string non_he = "non-hallucination error";
  if (masked.find(non_he) != std::string::npos) {
    if (granularity == Granularity::Coarse) found.insert(to_string(CoarseLabel::NonHallucinationError));
    else found.insert("<invalid>");
    replace_all(masked, non_he, "\x01");
  }
  for (const auto& [text, label] : labels) {
    if (text == non_he) continue;
    if (masked.find(text) != std::string::npos) found.insert(label_string(label));
  }
  if (found.size() != 1) return std::nullopt;
  return parse_label(*found.begin(), granularity);
}

std::optional<int> parse_confidence(std::string_view reply) {
  static const std::regex integer(R"(\d+)");
  const std::string s(reply);
  std::smatch m;
  if (!std::regex_search(s, m, integer)) return std::nullopt;
  if (m.str().size() > 3) return std::nullopt;
  const int v = std::stoi(m.str());
  if (v < 1 || v > 10) return std::nullopt;
  return v;
}

// ---------------------------------------------------------------------------

HttpChatBackend::HttpChatBackend(std::string url, std::optional<std::string> api_key)
    : api_key_(std::move(api_key)) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw ValidationError("judge endpoint is not an http(s) URL: " + url);
  origin_ = m[1];
  path_ = m[2].matched && m[2].length() > 1 ? m[2].str() : "/v1/chat/completions";
}

std::string HttpChatBackend::complete(const std::vector<ChatMessage>& messages, const ChatOptions& options) {
  nlohmann::json body;
  body["model"] = options.model;
  body["temperature"] = options.temperature;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

  httplib::Client client(origin_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
  client.set_connection_timeout(secs.count(), 0);
  client.set_read_timeout(secs.count(), 0);
  client.set_write_timeout(secs.count(), 0);
  httplib::Headers headers;
  if (api_key_) headers.emplace("Authorization", "Bearer " + *api_key_);

  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw TransportError("judge request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw TransportError(fmt::format("judge endpoint returned HTTP {}: {}", res->status, res->body.substr(0, 200)));
  }
  try {
    const auto j = nlohmann::json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed chat-completion response: ") + e.what());
  }
}

std::optional<PromptInput> extract_prompt_input(std::string_view prompt) {
  const auto tail = prompt.rfind(kTailMarker);
  if (tail == std::string_view::npos) return std::nullopt;
  const auto head = prompt.substr(0, tail);
  const auto out = head.rfind(kOutputMarker);
  if (out == std::string_view::npos) return std::nullopt;
  const auto gt = head.substr(0, out).rfind(kGroundTruthMarker);
  if (gt == std::string_view::npos) return std::nullopt;
  PromptInput in;
  in.granularity = prompt.find(kFineMarker) != std::string_view::npos ? Granularity::Fine : Granularity::Coarse;
  in.reference = std::string(head.substr(gt + kGroundTruthMarker.size(), out - gt - kGroundTruthMarker.size()));
  in.hypothesis = std::string(head.substr(out + kOutputMarker.size()));
  return in;
}

void MockBackend::replay(Granularity granularity, std::string reference, std::string hypothesis, std::string label,
                         std::optional<int> confidence) {
  std::lock_guard lock(mu_);
  entries_[{granularity, std::move(reference), std::move(hypothesis)}] = {std::move(label), confidence};
}

std::string MockBackend::complete(const std::vector<ChatMessage>& messages, const ChatOptions&) {
  ++calls_;
  if (messages.empty()) throw TransportError("mock: empty conversation");
  const auto input = extract_prompt_input(messages.front().content);
  if (!input) throw TransportError("mock: prompt has no Input section");
  std::optional<Entry> entry;
  {
    std::lock_guard lock(mu_);
    const auto it = entries_.find({input->granularity, input->reference, input->hypothesis});
    if (it != entries_.end()) entry = it->second;
  }
  if (messages.back().content == kConfidenceQuestion) {
    return fmt::format("Confidence: {}", entry && entry->confidence ? *entry->confidence : 9);
  }
  return entry ? entry->label : mock_rule(input->granularity, input->reference, input->hypothesis);
}

// ---------------------------------------------------------------------------

std::string cache_key(Granularity granularity, std::string_view reference, std::string_view hypothesis,
                      std::string_view model_name) {
  std::string material = template_hash(granularity);
  for (std::string_view part : {reference, hypothesis, model_name}) {
    material.push_back('\x1f');
    material.append(part);
  }
  return sha256_hex(material);
}

JudgeCache::JudgeCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(*path_);
  if (!in) return;
  std::string line;
  std::size_t skipped = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      CacheRecord r;
      r.key_hash = j.at("key_hash").get<std::string>();
      const auto g = parse_granularity(j.at("granularity").get<std::string>());
      if (!g) throw std::runtime_error("bad granularity");
      r.granularity = *g;
      r.model_name = j.at("model_name").get<std::string>();
      r.reference = j.at("reference").get<std::string>();
      r.hypothesis = j.at("hypothesis").get<std::string>();
      r.raw_response = j.at("raw_response").get<std::string>();
      r.label = j.at("label").get<std::string>();
      if (j.contains("confidence") && !j["confidence"].is_null()) r.confidence = j["confidence"].get<int>();
      records_[r.key_hash] = std::move(r);
    } catch (const std::exception&) {
      ++skipped;
    }
  }
  if (skipped) std::cerr << "judge cache " << path_->string() << ": skipped " << skipped << " malformed line(s)\n";
}

std::optional<CacheRecord> JudgeCache::lookup(const std::string& key) const {
  std::lock_guard lock(mu_);
  const auto it = records_.find(key);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void JudgeCache::store(const CacheRecord& record) {
  std::lock_guard lock(mu_);
  records_[record.key_hash] = record;
  if (!path_) return;
  nlohmann::ordered_json j;
  j["key_hash"] = record.key_hash;
  j["granularity"] = std::string(to_string(record.granularity));
  j["model_name"] = record.model_name;
  j["reference"] = record.reference;
  j["hypothesis"] = record.hypothesis;
  j["raw_response"] = record.raw_response;
  j["label"] = record.label;
  j["confidence"] = record.confidence ? nlohmann::ordered_json(*record.confidence) : nlohmann::ordered_json(nullptr);
  if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
  std::ofstream out(*path_, std::ios::app);
  out << j.dump() << "\n";
  out.flush();
  if (!out) throw Error("cannot append to judge cache " + path_->string());
}

std::size_t JudgeCache::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

void JudgeConfig::validate() const {
  if (temperature != 0.0) throw ValidationError("judge: temperature must be exactly 0 (greedy decoding)");
  if (max_retries < 0) throw ValidationError("judge: max_retries must be >= 0");
  if (concurrency_limit < 1) throw ValidationError("judge: concurrency_limit must be >= 1");
  if (model_name.empty()) throw ValidationError("judge: model_name is empty");
}

namespace {

struct Attempt {
  std::optional<std::string> reply;
  std::string error;
};

/// Calls the backend, retrying transport failures and replies rejected by
/// `accept`.
template <typename Accept>
Attempt call_with_retries(ChatBackend& backend, const std::vector<ChatMessage>& messages, const ChatOptions& options,
                          const JudgeConfig& config, Accept accept) {
  Attempt a;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0 && config.backoff_base.count() > 0) {
      std::this_thread::sleep_for(config.backoff_base * (1 << std::min(attempt - 1, 16)));
    }
    try {
      std::string reply = backend.complete(messages, options);
      if (accept(reply)) {
        a.reply = std::move(reply);
        a.error.clear();
        return a;
      }
      a.error = "unparseable reply: " + reply.substr(0, 200);
      a.reply = std::move(reply);
    } catch (const TransportError& e) {
      a.error = e.what();
    }
  }
  if (a.reply && !accept(*a.reply)) {
    // Keep the last raw reply for diagnostics but report failure.
    a.error = "unparseable after " + std::to_string(config.max_retries + 1) + " attempt(s): " + a.error;
  }
  return a;
}

JudgeVerdict judge_one(const JudgeRequest& req, Granularity granularity, const JudgeConfig& config,
                       ChatBackend& backend, JudgeCache* cache, bool with_confidence, UtcTime timestamp) {
  JudgeVerdict v;
  v.sample_id = req.sample_id;
  const std::string key = cache_key(granularity, req.reference.joined, req.hypothesis, config.model_name);
  const ChatOptions options{config.model_name, config.temperature, config.timeout};
  const std::string prompt = build_prompt(granularity, req.reference, req.hypothesis);

  std::optional<CacheRecord> record = cache ? cache->lookup(key) : std::nullopt;
  std::optional<AnyLabel> label;
  if (record) {
    label = parse_label(record->label, granularity);
    if (!label) record.reset();
  }
  if (record) {
    v.from_cache = true;
    v.raw_response = record->raw_response;
  } else {
    const auto accept = [&](const std::string& r) { return parse_verdict(r, granularity).has_value(); };
    Attempt a = call_with_retries(backend, {{"user", prompt}}, options, config, accept);
    if (!a.reply || !a.error.empty()) {
      v.raw_response = a.reply.value_or("");
      v.error = a.error;
      return v;
    }
    v.raw_response = *a.reply;
    label = parse_verdict(v.raw_response, granularity);
    record = CacheRecord{key, granularity, config.model_name, req.reference.joined, req.hypothesis,
                         v.raw_response, std::string(label_string(*label)), std::nullopt};
    if (cache) cache->store(*record);
  }

  ErrorLabel out;
  out.sample_id = req.sample_id;
  out.label = *label;
  out.source = LabelSource::Llm;
  out.judge_model = config.model_name;
  out.timestamp = timestamp;

  if (with_confidence) {
    if (record->confidence) {
      out.confidence = record->confidence;
    } else {
      const std::vector<ChatMessage> convo = {
          {"user", prompt}, {"assistant", v.raw_response}, {"user", std::string(kConfidenceQuestion)}};
      const auto accept = [](const std::string&) { return true; };
      Attempt a = call_with_retries(backend, convo, options, config, accept);
      if (a.reply) {
        v.confidence_raw_response = *a.reply;
        out.confidence = parse_confidence(*a.reply);
        if (!out.confidence) {
          std::cerr << "judge: no confidence in reply for " << req.sample_id << ": " << a.reply->substr(0, 80) << "\n";
        } else {
          record->confidence = out.confidence;
          if (cache) cache->store(*record);
        }
      } else {
        std::cerr << "judge: confidence turn failed for " << req.sample_id << ": " << a.error << "\n";
      }
    }
    v.from_cache = v.from_cache && !v.confidence_raw_response;
  }
  v.label = std::move(out);
  return v;
}

}  // namespace

std::vector<JudgeVerdict> classify_batch(std::span<const JudgeRequest> requests, Granularity granularity,
                                         const JudgeConfig& config, ChatBackend& backend, JudgeCache* cache,
                                         bool with_confidence, UtcTime timestamp) {
  config.validate();
  std::vector<JudgeVerdict> out(requests.size());
  if (requests.empty()) return out;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) {
      try {
        out[i] = judge_one(requests[i], granularity, config, backend, cache, with_confidence, timestamp);
      } catch (const std::exception& e) {
        out[i].sample_id = requests[i].sample_id;
        out[i].error = e.what();
      }
    }
  };
  const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(config.concurrency_limit), requests.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace hereval::judge
