// include/hereval/textnorm.hpp

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

#include <string>
#include <string_view>
#include <vector>

namespace hereval::textnorm {

/// Lowercase word tokens plus their single-space join.
struct NormalizedText {
  std::vector<std::string> tokens;
  std::string joined;

  bool empty() const { return tokens.empty(); }
  bool operator==(const NormalizedText&) const = default;
};

/// Characters replaced by whitespace before tokenization.
/// ASCII `.,!?;:"()[]{}-` plus em dash, en dash and horizontal ellipsis.
bool is_strip_codepoint(char32_t cp);

/// Deterministic English normalizer used before any metric or judge call.
///
/// Steps: lowercase, strip punctuation, split on whitespace, expand the
/// contraction table (i'm, won't, can't, n't, 'll, 've, 're, 'd), then delete
/// any apostrophe that is left (dog's -> dogs). Digits are kept verbatim and
/// non-ASCII letters are lowercased but not folded. Total and idempotent.
NormalizedText normalize_english(std::string_view raw);

/// Build a NormalizedText from tokens that are already normalized.
NormalizedText from_tokens(std::vector<std::string> tokens);

/// Decode UTF-8 into code points. Invalid bytes map to U+FFFD.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);

}  // namespace hereval::textnorm
