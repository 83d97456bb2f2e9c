// tests/test_shift.cpp

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
#include <filesystem>
#include <fstream>
#include <random>

#include "hereval/error.hpp"
#include "hereval/shift.hpp"

using namespace hereval;
using shift::EmbeddingLayer;
using shift::EmbeddingMatrix;

namespace {

EmbeddingMatrix matrix(std::string domain, std::vector<std::pair<std::size_t, std::vector<float>>> layers) {
  EmbeddingMatrix m;
  m.domain = std::move(domain);
  for (auto& [d, data] : layers) m.layers.push_back({d, std::move(data)});
  return m;
}

EmbeddingMatrix random_matrix(std::mt19937_64& rng, std::string domain, std::size_t L, std::size_t d,
                              std::size_t n, float shift) {
  std::normal_distribution<float> g(shift, 1.0f);
  EmbeddingMatrix m;
  m.domain = std::move(domain);
  for (std::size_t l = 0; l < L; ++l) {
    EmbeddingLayer layer{d, std::vector<float>(n * d)};
    for (auto& x : layer.data) x = g(rng);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

// Direct evaluation of the layer-averaged squared mean gap.
double cmd_oracle(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  long double total = 0;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    const auto& la = a.layers[l];
    const auto& lb = b.layers[l];
    for (std::size_t c = 0; c < la.dim; ++c) {
      long double ma = 0, mb = 0;
      for (std::size_t r = 0; r < la.count(); ++r) ma += la.data[r * la.dim + c];
      for (std::size_t r = 0; r < lb.count(); ++r) mb += lb.data[r * lb.dim + c];
      ma /= la.count();
      mb /= lb.count();
      total += (ma - mb) * (ma - mb);
    }
  }
  return static_cast<double>(total / a.layers.size());
}

}  // namespace

TEST_CASE("cmd hand fixtures") {
  const auto a = matrix("s", {{2, {0, 0}}});
  const auto b = matrix("t", {{2, {3, 4}}});
  CHECK(shift::cmd(a, b).cmd == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(shift::cmd(a, a).cmd == 0.0);

  // Layer gaps of norm 1 and 3.
  const auto s2 = matrix("s", {{2, {0, 0, 2, 0}}, {3, {0, 0, 0}}});
  const auto t2 = matrix("t", {{2, {2, 0, 2, 0}}, {3, {1, 2, 2}}});
  CHECK(std::abs(shift::cmd(s2, t2).cmd - 5.0) < 1e-9);
  CHECK(std::abs(cmd_oracle(s2, t2) - 5.0) < 1e-9);
}

TEST_CASE("cmd errors") {
  const auto a = matrix("s", {{2, {0, 0}}});
  CHECK_THROWS_AS(shift::cmd(a, matrix("t", {{3, {0, 0, 0}}})), ValidationError);
  CHECK_THROWS_AS(shift::cmd(a, matrix("t", {{2, {0, 0}}, {2, {0, 0}}})), ValidationError);
  CHECK_THROWS_AS(shift::cmd(a, matrix("t", {{2, {}}})), ValidationError);
}

TEST_CASE("cmd properties") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_matrix(rng, "a", 3, 8, 40, 0.0f);
    const auto b = random_matrix(rng, "b", 3, 8, 25, 0.5f);
    const double ab = shift::cmd(a, b).cmd;
    CHECK(ab >= 0.0);
    CHECK(std::abs(ab - shift::cmd(b, a).cmd) < 1e-9);
    CHECK(std::abs(ab - cmd_oracle(a, b)) < 1e-9);
    CHECK(std::abs(ab - shift::cmd(a, b, shift::Parallelism::Serial).cmd) == 0.0);

    auto ta = a, tb = b, sa = a, sb = b, da = a;
    const float c = 3.0f;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
      for (auto& x : ta.layers[l].data) x += 1.5f;
      for (auto& x : tb.layers[l].data) x += 1.5f;
      for (auto& x : sa.layers[l].data) x *= c;
      for (auto& x : sb.layers[l].data) x *= c;
      da.layers[l].data.insert(da.layers[l].data.end(), a.layers[l].data.begin(), a.layers[l].data.end());
    }
    CHECK(std::abs(shift::cmd(ta, tb).cmd - ab) < 1e-5);
    CHECK(std::abs(shift::cmd(sa, sb).cmd - c * c * ab) < 1e-9 * std::max(1.0, c * c * ab) + 1e-6);
    CHECK(std::abs(shift::cmd(da, b).cmd - ab) < 1e-9);
  }
}

TEST_CASE("higher-order extension") {
  std::mt19937_64 rng(8);
  const auto a = random_matrix(rng, "a", 2, 4, 50, 0.0f);
  const auto b = random_matrix(rng, "b", 2, 4, 50, 0.2f);
  CHECK(shift::cmd_higher_order(a, b, 1).cmd == shift::cmd(a, b).cmd);
  CHECK(shift::cmd_higher_order(a, b, 3).cmd >= shift::cmd(a, b).cmd);
  CHECK(shift::cmd_higher_order(a, a, 4).cmd == 0.0);
  CHECK_THROWS_AS(shift::cmd_higher_order(a, b, 0), ValidationError);
}

TEST_CASE("correlation") {
  std::vector<shift::Point> up, down;
  for (int i = 0; i < 7; ++i) {
    up.push_back({double(i), 2.0 * i + 1.0});
    down.push_back({double(i), -double(i)});
  }
  CHECK(std::abs(shift::correlation(up).alpha - 1.0) < 1e-12);
  CHECK(std::abs(shift::correlation(down).alpha + 1.0) < 1e-12);
  CHECK(std::abs(shift::correlation({{0, 0}, {1, 1}, {2, 0}}).alpha) < 1e-12);
  CHECK_THROWS_AS(shift::correlation({{0, 1}, {1, 1}, {2, 1}}), ValidationError);
  CHECK_THROWS_AS(shift::correlation({{0, 1}}), ValidationError);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<double> x(30), y(30), ya(30), yn(30);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = g(rng);
    y[i] = x[i] + g(rng);
    ya[i] = 3.0 * y[i] + 7.0;
    yn[i] = -y[i];
  }
  const double r = shift::pearson(x, y);
  CHECK(std::abs(shift::pearson(x, ya) - r) < 1e-12);
  CHECK(std::abs(shift::pearson(x, yn) + r) < 1e-12);
  CHECK(std::abs(r) <= 1.0);
  CHECK(shift::spearman({1, 2, 3, 4}, {1, 4, 9, 16}) == doctest::Approx(1.0));
  CHECK(shift::spearman({1, 2, 3}, {1, 1, 2}) == doctest::Approx(0.8660254037844386));
}

TEST_CASE("degradation table") {
  std::map<std::string, EmbeddingMatrix> embs;
  embs["ls"] = matrix("ls", {{2, {0, 0, 2, 0}}});
  embs["a"] = matrix("a", {{2, {1, 1, 3, 1}}});
  embs["b"] = matrix("b", {{2, {0, 2, 2, 4}}});
  embs["c"] = matrix("c", {{2, {3, 3, 5, 1}}});
  embs["d"] = matrix("d", {{2, {-2, -1, 0, -1}}});
  const std::vector<shift::DomainRates> reports = {
      {"m", "ls", 4.0, 0.01}, {"m", "a", 10.5, 0.03}, {"m", "b", 31.0, 0.12},
      {"m", "c", 40.25, 0.10}, {"m", "d", 12.0, 0.05}};

  SUBCASE("spreadsheet values") {
    const auto t = shift::shift_degradation_table(reports, embs, "ls");
    REQUIRE(t.rows.size() == 4);
    CHECK(t.rows[0].cmd == doctest::Approx(2.0));
    CHECK(t.rows[1].cmd == doctest::Approx(9.0));
    CHECK(t.rows[2].cmd == doctest::Approx(13.0));
    CHECK(t.rows[3].cmd == doctest::Approx(5.0));
    CHECK(t.rows[2].werd == doctest::Approx(36.25));
    // Values from an independent spreadsheet (numpy corrcoef) computation.
    CHECK(std::abs(*t.alpha_werd_pooled - 0.971930322800043) < 1e-9);
    CHECK(std::abs(*t.alpha_herd_pooled - 0.8531648275594598) < 1e-9);
    CHECK(*t.alpha_werd_per_model == *t.alpha_werd_pooled);
    const auto s = shift::shift_degradation_table(reports, embs, "ls", shift::CorrelationKind::Spearman);
    CHECK(std::abs(*s.alpha_werd_pooled - 1.0) < 1e-12);
    CHECK(std::abs(*s.alpha_herd_pooled - 0.8) < 1e-9);
  }

  SUBCASE("perfectly linear targets") {
    std::map<std::string, EmbeddingMatrix> e;
    e["src"] = matrix("src", {{1, {0}}});
    e["t1"] = matrix("t1", {{1, {1}}});
    e["t2"] = matrix("t2", {{1, {std::sqrt(2.0f)}}});
    e["t3"] = matrix("t3", {{1, {std::sqrt(3.0f)}}});
    const std::vector<shift::DomainRates> r = {
        {"m", "src", 10, std::nullopt}, {"m", "t1", 12, std::nullopt}, {"m", "t2", 14, std::nullopt},
        {"m", "t3", 16, std::nullopt}};
    const auto t = shift::shift_degradation_table(r, e, "src");
    CHECK(std::abs(*t.alpha_werd_pooled - 1.0) < 1e-6);
    CHECK_FALSE(t.alpha_herd_pooled);
  }

  SUBCASE("single target equal to source") {
    std::map<std::string, EmbeddingMatrix> e;
    e["src"] = matrix("src", {{2, {1, 2, 3, 4}}});
    e["copy"] = matrix("copy", {{2, {1, 2, 3, 4}}});
    const std::vector<shift::DomainRates> r = {{"m", "src", 10, 0.1}, {"m", "copy", 10, 0.1}};
    const auto t = shift::shift_degradation_table(r, e, "src");
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].cmd == 0.0);
    CHECK(t.rows[0].werd == 0.0);
    CHECK(*t.rows[0].herd == 0.0);
    CHECK_FALSE(t.alpha_werd_pooled);
    CHECK_FALSE(t.alpha_werd_per_model);
    CHECK(shift::to_csv(t).find("copy") != std::string::npos);
  }

  SUBCASE("missing source or target embeddings") {
    CHECK_THROWS_AS(shift::shift_degradation_table(reports, embs, "nowhere"), ValidationError);
    auto partial = embs;
    partial.erase("c");
    CHECK_THROWS_AS(shift::shift_degradation_table(reports, partial, "ls"), ValidationError);
  }
}

TEST_CASE("embedding files round-trip") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "hereval_test_embeddings";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::mt19937_64 rng(6);
  const auto a = random_matrix(rng, "alpha", 2, 5, 7, 0.0f);
  shift::save_embedding(a, dir);
  {
    std::ofstream(dir / "beta.layer0.csv") << "1,2\n3,4\n";
    std::ofstream(dir / "beta.layer1.csv") << "0.5,0.5,1\n";
  }
  const auto loaded = shift::load_embedding_dir(dir);
  REQUIRE(loaded.count("alpha"));
  REQUIRE(loaded.count("beta"));
  CHECK(loaded.at("alpha").layers.size() == 2);
  CHECK(loaded.at("alpha").layers[1].data == a.layers[1].data);
  CHECK(loaded.at("beta").layers[0].count() == 2);
  CHECK(loaded.at("beta").layers[1].dim == 3);
  fs::remove_all(dir);
}
