// include/hereval/judge.hpp

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
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "hereval/taxonomy.hpp"
#include "hereval/textnorm.hpp"

namespace hereval::judge {

// ---------------------------------------------------------------------------
// Prompts

/// Frozen classification prompt with {ground_truth} and {output} placeholders.
std::string_view prompt_template(Granularity granularity);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Hex SHA-256 of the frozen template; part of every cache key.
std::string template_hash(Granularity granularity);

/// Substitute the reference and hypothesis into the template verbatim.
/// Throws ValidationError on an empty reference.
std::string build_prompt(Granularity granularity, const textnorm::NormalizedText& reference,
                         std::string_view hypothesis);

/// Follow-up turn that elicits a 1-10 verbalized confidence.
inline constexpr std::string_view kConfidenceQuestion =
    "How confident are you about the classification on a scale of 1\xE2\x80\x93" "10? Confidence:";

/// Match a judge reply against the closed label set of `granularity`.
/// Surrounding whitespace, quotes and periods are ignored and matching is
/// case-insensitive. Extra text is tolerated only when exactly one label
/// occurs; otherwise the reply is unclassified (nullopt).
std::optional<AnyLabel> parse_verdict(std::string_view raw, Granularity granularity);

/// First integer in the reply, if it lies in 1..10.
std::optional<int> parse_confidence(std::string_view reply);

// ---------------------------------------------------------------------------
// Backends

struct ChatMessage {
  std::string role;  // "user" or "assistant"
  std::string content;
};

struct ChatOptions {
  std::string model;
  double temperature = 0.0;
  std::chrono::milliseconds timeout{60000};
};

/// A chat-completion endpoint. complete() throws TransportError on failure.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages, const ChatOptions& options) = 0;
};

/// OpenAI-compatible POST {model, messages, temperature}; reads
/// choices[0].message.content. The URL may carry a path; when it does not,
/// /v1/chat/completions is used.
class HttpChatBackend : public ChatBackend {
 public:
  HttpChatBackend(std::string url, std::optional<std::string> api_key);
  std::string complete(const std::vector<ChatMessage>& messages, const ChatOptions& options) override;

 private:
  std::string origin_;
  std::string path_;
  std::optional<std::string> api_key_;
};

/// The reference/hypothesis pair substituted into a prompt, recovered from
/// its final Input section.
struct PromptInput {
  Granularity granularity = Granularity::Coarse;
  std::string reference;
  std::string hypothesis;
};
std::optional<PromptInput> extract_prompt_input(std::string_view prompt);

/// Offline backend. Replays labels registered per (granularity, reference,
/// hypothesis); unregistered pairs get a deterministic rule: identical token
/// lists -> No Error, no shared token -> Hallucination Error, otherwise
/// Non-Hallucination Error (coarse) or Phonetic Error (fine). Confidence
/// turns reply "Confidence: N" (registered value, default 9).
class MockBackend : public ChatBackend {
 public:
  void replay(Granularity granularity, std::string reference, std::string hypothesis, std::string label,
              std::optional<int> confidence = std::nullopt);
  std::string complete(const std::vector<ChatMessage>& messages, const ChatOptions& options) override;
  std::size_t calls() const { return calls_.load(); }

 private:
  using Key = std::tuple<Granularity, std::string, std::string>;
  struct Entry {
    std::string label;
    std::optional<int> confidence;
  };
  std::mutex mu_;
  std::map<Key, Entry> entries_;
  std::atomic<std::size_t> calls_{0};
};

// ---------------------------------------------------------------------------
// Cache

struct CacheRecord {
  std::string key_hash;
  Granularity granularity = Granularity::Coarse;
  std::string model_name;
  std::string reference;
  std::string hypothesis;
  std::string raw_response;
  std::string label;
  std::optional<int> confidence;
};

std::string cache_key(Granularity granularity, std::string_view reference, std::string_view hypothesis,
                      std::string_view model_name);

/// Append-only JSONL cache. The last record for a key wins on load.
class JudgeCache {
 public:
  JudgeCache() = default;  // in-memory only
  explicit JudgeCache(std::filesystem::path path);

  std::optional<CacheRecord> lookup(const std::string& key) const;
  void store(const CacheRecord& record);
  std::size_t size() const;

 private:
  std::optional<std::filesystem::path> path_;
  mutable std::mutex mu_;
  std::map<std::string, CacheRecord> records_;
};

// ---------------------------------------------------------------------------
// Batch classification

struct JudgeConfig {
  std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
  std::string model_name = "gpt-4o-mini";
  double temperature = 0.0;
  int max_retries = 3;
  int concurrency_limit = 4;
  std::string cache_path;
  std::chrono::milliseconds timeout{60000};
  /// Retry k (0-based) waits backoff_base * 2^k.
  std::chrono::milliseconds backoff_base{1000};

  /// Temperature must be exactly 0 (greedy decoding).
  void validate() const;
};

struct JudgeRequest {
  std::string sample_id;
  textnorm::NormalizedText reference;
  std::string hypothesis;
};

struct JudgeVerdict {
  std::string sample_id;
  std::optional<ErrorLabel> label;  // absent: unclassified
  std::string raw_response;
  std::optional<std::string> confidence_raw_response;
  std::string error;
  bool from_cache = false;

  bool classified() const { return label.has_value(); }
};

/// One verdict per request, in request order. Cached keys cost no backend
/// call. Transport failures and unparseable replies are retried up to
/// max_retries and then reported as unclassified; the batch never aborts.
std::vector<JudgeVerdict> classify_batch(std::span<const JudgeRequest> requests, Granularity granularity,
                                         const JudgeConfig& config, ChatBackend& backend, JudgeCache* cache,
                                         bool with_confidence, UtcTime timestamp);

}  // namespace hereval::judge
