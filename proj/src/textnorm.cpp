// src/textnorm.cpp

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

#include "hereval/textnorm.hpp"

#include <array>
#include <utility>

namespace hereval::textnorm {
namespace {

constexpr char32_t kReplacement = 0xFFFD;

char32_t to_lower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  if (cp < 0x80) return cp;
  // Latin-1 supplement, minus the multiplication sign.
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  // Latin Extended-A pairs.
  if (cp >= 0x100 && cp <= 0x17F) {
    if (cp == 0x130) return U'i';
    if (cp == 0x178) return 0xFF;
    if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp == 0x131 || cp == 0x138 || cp == 0x149 || cp == 0x17F) return cp;
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  // Greek capitals.
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 0x20;
  if (cp == 0x386) return 0x3AC;
  if (cp >= 0x388 && cp <= 0x38A) return cp + 37;
  if (cp == 0x38C) return 0x3CC;
  if (cp == 0x38E || cp == 0x38F) return cp + 63;
  // Cyrillic capitals.
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

bool is_space(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' || cp == U'\v' ||
         cp == 0xA0;
}

bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == 0x2019 || cp == 0x2018; }

struct Contraction {
  std::string_view suffix;
  std::string_view expansion;
};

constexpr std::array<std::pair<std::string_view, std::array<std::string_view, 2>>, 3> kWholeWord = {{
    {"i'm", {"i", "am"}},
    {"won't", {"will", "not"}},
    {"can't", {"can", "not"}},
}};

constexpr std::array<Contraction, 5> kSuffixes = {{
    {"n't", "not"},
    {"'ll", "will"},
    {"'ve", "have"},
    {"'re", "are"},
    {"'d", "would"},
}};

void push_without_apostrophes(std::string_view piece, std::vector<std::string>& out) {
  std::string cleaned;
  cleaned.reserve(piece.size());
  for (char c : piece) {
    if (c != '\'') cleaned.push_back(c);
  }
  if (!cleaned.empty()) out.push_back(std::move(cleaned));
}

void expand_token(std::string_view token, std::vector<std::string>& out) {
  for (const auto& [word, expansion] : kWholeWord) {
    if (token == word) {
      out.emplace_back(expansion[0]);
      out.emplace_back(expansion[1]);
      return;
    }
  }
  for (const auto& c : kSuffixes) {
    if (token.size() > c.suffix.size() && token.ends_with(c.suffix)) {
      push_without_apostrophes(token.substr(0, token.size() - c.suffix.size()), out);
      out.emplace_back(c.expansion);
      return;
    }
  }
  push_without_apostrophes(token, out);
}

}  // namespace

bool is_strip_codepoint(char32_t cp) {
  switch (cp) {
    case U'.': case U',': case U'!': case U'?': case U';': case U':': case U'"':
    case U'(': case U')': case U'[': case U']': case U'{': case U'}': case U'-':
    case 0x2014: case 0x2013: case 0x2026:
      return true;
    default:
      return false;
  }
}

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    int len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + len > text.size()) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

NormalizedText from_tokens(std::vector<std::string> tokens) {
  NormalizedText out;
  out.tokens = std::move(tokens);
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    if (i) out.joined.push_back(' ');
    out.joined += out.tokens[i];
  }
  return out;
}

NormalizedText normalize_english(std::string_view raw) {
  std::u32string cleaned = decode_utf8(raw);
  for (char32_t& cp : cleaned) {
    cp = to_lower(cp);
    if (is_strip_codepoint(cp) || is_space(cp)) {
      cp = U' ';
    } else if (is_apostrophe(cp)) {
      cp = U'\'';
    }
  }

  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < cleaned.size()) {
    while (pos < cleaned.size() && cleaned[pos] == U' ') ++pos;
    std::size_t end = pos;
    while (end < cleaned.size() && cleaned[end] != U' ') ++end;
    if (end > pos) {
      expand_token(encode_utf8(std::u32string_view(cleaned).substr(pos, end - pos)), tokens);
    }
    pos = end;
  }
  return from_tokens(std::move(tokens));
}

}  // namespace hereval::textnorm
