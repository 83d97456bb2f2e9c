// tests/test_textnorm.cpp

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

#include <random>
#include <string>
#include <vector>

#include "hereval/textnorm.hpp"

using hereval::textnorm::normalize_english;
using Tokens = std::vector<std::string>;

namespace {

std::string ascii_upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string random_text(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces = {
      "hello", "World", "i'm", "won't", "can't", "didn't", "we'll", "they've", "you're", "she'd",
      "dog's", "rock'n'roll", "'quoted'", "42", "3.14", "--", "...", "!", "?", ",", "\"", "(x)",
      "\xE2\x80\x94", "\xE2\x80\x99", "caf\xC3\xA9", "\xC3\x89" "COLE", "\t", "\n", "  ", "'", "o'clock"};
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1), len(0, 12);
  std::string out;
  for (std::size_t i = 0, n = len(rng); i < n; ++i) {
    out += pieces[pick(rng)];
    if (rng() % 2) out += ' ';
  }
  return out;
}

}  // namespace

TEST_CASE("basic lowercasing and punctuation") {
  CHECK(normalize_english("Hello, World!").tokens == Tokens{"hello", "world"});
  CHECK(normalize_english("Humm reaction in hippos fruit?").tokens ==
        Tokens{"humm", "reaction", "in", "hippos", "fruit"});
  CHECK(normalize_english("").tokens.empty());
  CHECK(normalize_english("  ?! ... ").tokens.empty());
  CHECK(normalize_english("a-b c\xE2\x80\x94" "d").tokens == Tokens{"a", "b", "c", "d"});
}

TEST_CASE("contractions") {
  CHECK(normalize_english("god i'm forty five").tokens == Tokens{"god", "i", "am", "forty", "five"});
  CHECK(normalize_english("I won't").tokens == Tokens{"i", "will", "not"});
  CHECK(normalize_english("it can't be done").tokens == Tokens{"it", "can", "not", "be", "done"});
  CHECK(normalize_english("didn't").tokens == Tokens{"did", "not"});
  CHECK(normalize_english("we'll").tokens == Tokens{"we", "will"});
  CHECK(normalize_english("they've").tokens == Tokens{"they", "have"});
  CHECK(normalize_english("you're").tokens == Tokens{"you", "are"});
  CHECK(normalize_english("she'd").tokens == Tokens{"she", "would"});
  CHECK(normalize_english("I\xE2\x80\x99m").tokens == Tokens{"i", "am"});
}

TEST_CASE("residual apostrophes are deleted") {
  CHECK(normalize_english("dog's").tokens == Tokens{"dogs"});
  CHECK(normalize_english("i love her dog's secretary show").tokens ==
        Tokens{"i", "love", "her", "dogs", "secretary", "show"});
  CHECK(normalize_english("'tis").tokens == Tokens{"tis"});
  CHECK(normalize_english("'").tokens.empty());
}

TEST_CASE("digits and non-ascii letters") {
  CHECK(normalize_english("Flight 42 at 3.14").tokens == Tokens{"flight", "42", "at", "3", "14"});
  CHECK(normalize_english("\xC3\x89" "cole CAF\xC3\x89").tokens == Tokens{"\xC3\xA9" "cole", "caf\xC3\xA9"});
}

TEST_CASE("joined is the single-space join") {
  const auto n = normalize_english("  A\tb\n\nc  ");
  CHECK(n.joined == "a b c");
}

TEST_CASE("properties over random text") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const std::string x = random_text(rng);
    const auto once = normalize_english(x);
    CAPTURE(x);
    CHECK(normalize_english(once.joined) == once);
    CHECK(normalize_english(ascii_upper(x)) == once);
    std::string spaced;
    for (char c : x) spaced += c == ' ' ? std::string(" \t \n ") : std::string(1, c);
    CHECK(normalize_english(spaced).tokens == once.tokens);
    for (const auto& t : once.tokens) {
      CHECK(!t.empty());
      for (const char32_t cp : hereval::textnorm::decode_utf8(t)) {
        CHECK_FALSE(hereval::textnorm::is_strip_codepoint(cp));
        CHECK(cp != U'\'');
        CHECK(cp != U' ');
      }
    }
  }
}

TEST_CASE("invalid utf-8 does not throw") {
  CHECK_NOTHROW(normalize_english("\xFF\xFE abc \xC3"));
}
