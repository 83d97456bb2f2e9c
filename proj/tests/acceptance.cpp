// tests/acceptance.cpp

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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <fmt/format.h>

#include "hereval/corpus.hpp"
#include "hereval/judge.hpp"
#include "hereval/metrics.hpp"
#include "hereval/perturb.hpp"
#include "hereval/shift.hpp"
#include "hereval/stats.hpp"
#include "hereval/textnorm.hpp"
#include "synthetic.hpp"

using namespace hereval;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int shell(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd = "env -u HEREVAL_LLM_URL -u HEREVAL_LLM_API_KEY SOURCE_DATE_EPOCH=1700000000 '" HEREVAL_CLI
                          "' " + args + " >'" + stdout_file.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void golden_wer(Check& c) {
  const auto t0 = Clock::now();
  const std::vector<std::tuple<const char*, const char*, double>> rows = {
      {"hungry action hippos fruit", "Humm reaction in hippos fruit?", 75.0},
      {"yeah", "in a handsome coat", 400.0},
      {"today yeah", "she did yes", 150.0},
      {"god i'm forty five", "god he whisper i'm forty five", 40.0},
      {"another dog secretary show", "i love her dog's secretary show", 100.0},
      {"patel para thirty eight page three hundred and fifty five", "How much is the tail?", 100.0},
  };
  for (const auto& [r, h, want] : rows) {
    const double got =
        metrics::word_error_rate(textnorm::normalize_english(r), textnorm::normalize_english(h)).wer;
    c.expect(got == want, fmt::format("'{}': {} != {}", r, got, want));
  }
  c.expect(seconds_since(t0) < 1.0, "runtime over 1 s");
}

void her_definition(Check& c) {
  const auto samples = corpus::load_manifest(HEREVAL_FIXTURES "/golden_rows.jsonl");
  judge::MockBackend mock;
  corpus::register_mock_labels(mock, samples);
  std::vector<judge::JudgeRequest> reqs;
  for (const auto& s : samples) {
    reqs.push_back({s.id, textnorm::normalize_english(s.reference), textnorm::normalize_english(s.hypothesis).joined});
  }
  judge::JudgeConfig cfg;
  const auto v = judge::classify_batch(reqs, Granularity::Coarse, cfg, mock, nullptr, false, UtcTime{});
  std::vector<AnyLabel> labels;
  for (const auto& x : v) {
    c.expect(x.classified(), x.sample_id + " unclassified");
    if (x.classified()) labels.push_back(x.label->label);
  }
  c.expect(labels.size() == 8, "expected 8 labels");
  c.expect(metrics::her(labels) == 7.0 / 8.0, fmt::format("HER {} != 7/8", metrics::her(labels)));
}

shift::EmbeddingMatrix matrix(std::string domain, std::vector<std::pair<std::size_t, std::vector<float>>> layers) {
  shift::EmbeddingMatrix m;
  m.domain = std::move(domain);
  for (auto& [d, data] : layers) m.layers.push_back({d, std::move(data)});
  return m;
}

void cmd_properties(Check& c) {
  const auto s2 = matrix("s", {{2, {0, 0, 2, 0}}, {3, {0, 0, 0}}});
  const auto t2 = matrix("t", {{2, {2, 0, 2, 0}}, {3, {1, 2, 2}}});
  c.expect(std::abs(shift::cmd(s2, t2).cmd - 5.0) < 1e-9, "hand fixture != 5.0");
  std::mt19937_64 rng(3);
  std::normal_distribution<float> g;
  for (int trial = 0; trial < 10; ++trial) {
    shift::EmbeddingMatrix a, b;
    for (int l = 0; l < 3; ++l) {
      shift::EmbeddingLayer la{6, {}}, lb{6, {}};
      for (int i = 0; i < 6 * 30; ++i) la.data.push_back(g(rng));
      for (int i = 0; i < 6 * 20; ++i) lb.data.push_back(g(rng) + 0.4f);
      a.layers.push_back(la);
      b.layers.push_back(lb);
    }
    const double ab = shift::cmd(a, b).cmd;
    c.expect(shift::cmd(a, a).cmd == 0.0, "cmd(A,A) != 0");
    c.expect(std::abs(ab - shift::cmd(b, a).cmd) < 1e-9, "asymmetric");
    auto sa = a, sb = b;
    const float k = 2.0f;
    for (auto* m : {&sa, &sb}) {
      for (auto& layer : m->layers) {
        for (auto& x : layer.data) x *= k;
      }
    }
    c.expect(std::abs(shift::cmd(sa, sb).cmd - k * k * ab) < 1e-9, "c^2 scaling");
  }
}

void correlation(Check& c) {
  std::vector<shift::Point> up, down;
  for (int i = 0; i < 9; ++i) {
    up.push_back({double(i), 0.5 * i - 3.0});
    down.push_back({double(i), 10.0 - 4.0 * i});
  }
  c.expect(std::abs(shift::correlation(up).alpha - 1.0) < 1e-12, "perfect positive");
  c.expect(std::abs(shift::correlation(down).alpha + 1.0) < 1e-12, "perfect negative");

  std::map<std::string, shift::EmbeddingMatrix> embs;
  embs["ls"] = matrix("ls", {{2, {0, 0, 2, 0}}});
  embs["a"] = matrix("a", {{2, {1, 1, 3, 1}}});
  embs["b"] = matrix("b", {{2, {0, 2, 2, 4}}});
  embs["c"] = matrix("c", {{2, {3, 3, 5, 1}}});
  embs["d"] = matrix("d", {{2, {-2, -1, 0, -1}}});
  const std::vector<shift::DomainRates> reports = {{"m", "ls", 4.0, 0.01}, {"m", "a", 10.5, 0.03},
                                                   {"m", "b", 31.0, 0.12}, {"m", "c", 40.25, 0.10},
                                                   {"m", "d", 12.0, 0.05}};
  const auto t = shift::shift_degradation_table(reports, embs, "ls");
  c.expect(t.alpha_werd_pooled && std::abs(*t.alpha_werd_pooled - 0.971930322800043) < 1e-9, "werd alpha");
  c.expect(t.alpha_herd_pooled && std::abs(*t.alpha_herd_pooled - 0.8531648275594598) < 1e-9, "herd alpha");
}

void cost_model(Check& c) {
  const auto tmp = fs::temp_directory_path() / "hereval_acceptance_cost";
  c.expect(shell("cost --n 1000000", tmp) == 0, "cost exited nonzero");
  const auto out = slurp(tmp);
  c.expect(out.find("llm_cost 78.00\n") != std::string::npos, "llm_cost != 78.00");
  c.expect(out.find("human_cost 33333.33\n") != std::string::npos, "human_cost != 33333.33");
  const auto e = stats::estimate_cost(1e6);
  c.expect(std::abs(e.ratio - (1e6 * 10.0 / 50.0 / 60.0 * 10.0) / 78.0) < 1e-9, "ratio");
}

audio::AudioBuffer sine(double hz, double seconds, double amp) {
  audio::AudioBuffer a;
  a.samples.resize(static_cast<std::size_t>(seconds * a.sample_rate));
  for (std::size_t n = 0; n < a.samples.size(); ++n) {
    a.samples[n] = static_cast<float>(amp * std::sin(2.0 * M_PI * hz * static_cast<double>(n) / a.sample_rate));
  }
  return a;
}

double peak_hz(const audio::AudioBuffer& a) {
  const std::size_t len = std::min<std::size_t>(8192, a.samples.size());
  const std::size_t start = (a.samples.size() - len) / 2;
  double best_f = 0, best = -1;
  for (double f = 50.0; f <= 2000.0; f += 0.5) {
    std::complex<double> acc = 0.0, ph = 1.0;
    const auto step = std::polar(1.0, -2.0 * M_PI * f / a.sample_rate);
    for (std::size_t n = 0; n < len; ++n) {
      acc += (0.5 - 0.5 * std::cos(2.0 * M_PI * n / (len - 1))) * a.samples[start + n] * ph;
      ph *= step;
    }
    if (std::abs(acc) > best) {
      best = std::abs(acc);
      best_f = f;
    }
  }
  return best_f;
}

void perturbation(Check& c) {
  const auto t0 = Clock::now();
  const auto x = sine(1000, 1.0, 0.25);
  for (double snr : {0.0, 10.0, 20.0}) {
    const auto y = perturb::add_white_noise(x, snr, 1);
    c.expect(std::abs(perturb::measured_snr_db(x, y) - snr) < 0.1, fmt::format("white noise at {} dB", snr));
  }
  const auto bg = perturb::add_white_noise(sine(3000, 1.5, 0.3), 0.0, 2);
  for (double snr : {5.0, 15.0}) {
    const auto y = perturb::background_mix(x, bg, snr);
    c.expect(std::abs(perturb::measured_snr_db(x, y) - snr) < 0.1, fmt::format("background mix at {} dB", snr));
  }
  const auto two = sine(440, 2.0, 0.5);
  const auto fast = perturb::time_stretch(two, 2.0);
  c.expect(std::abs(static_cast<long>(fast.samples.size()) - static_cast<long>(two.samples.size() / 2)) <=
               static_cast<long>(perturb::kHopSize),
           "time_stretch(2.0) length");
  const auto up = perturb::pitch_shift(sine(220, 1.0, 0.5), 12.0);
  const auto down = perturb::pitch_shift(sine(440, 1.0, 0.5), -12.0);
  c.expect(std::abs(peak_hz(up) / 220.0 - 2.0) <= 0.04, fmt::format("pitch +12 peak {}", peak_hz(up)));
  c.expect(std::abs(440.0 / peak_hz(down) - 2.0) <= 0.04, fmt::format("pitch -12 peak {}", peak_hz(down)));
  c.expect(seconds_since(t0) < 10.0, "runtime over 10 s");
}

void transitions(Check& c) {
  std::map<std::string, std::string> norm, orth;
  int id = 0;
  auto add = [&](const char* from, const char* to, int n) {
    for (int i = 0; i < n; ++i, ++id) {
      norm["s" + std::to_string(id)] = from;
      orth["s" + std::to_string(id)] = to;
    }
  };
  add("HE", "HE", 180);
  add("NHE", "NHE", 200);
  add("NE", "NE", 108);
  add("HE", "NE", 2);
  add("HE", "NHE", 7);
  add("NE", "NHE", 1);
  add("NHE", "HE", 2);
  const auto t = stats::transition_matrix(norm, orth);
  std::map<std::pair<std::string, std::string>, std::size_t> off;
  for (const auto& tr : t.off_diagonal()) off[{tr.from, tr.to}] = tr.count;
  const std::map<std::pair<std::string, std::string>, std::size_t> want = {
      {{"HE", "NE"}, 2}, {{"HE", "NHE"}, 7}, {{"NE", "NHE"}, 1}, {{"NHE", "HE"}, 2}};
  c.expect(off == want, "off-diagonal counts");
  c.expect(t.overall_agreement() == 0.976, fmt::format("agreement {}", t.overall_agreement()));
}

double naive_bootstrap_std(const std::vector<std::string>& a, const std::vector<std::string>& b, int iters) {
  std::minstd_rand rng(12345);
  std::vector<double> means;
  for (int it = 0; it < iters; ++it) {
    double hits = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const std::size_t j = rng() % a.size();
      hits += a[j] == b[j];
    }
    means.push_back(hits / a.size());
  }
  double m = 0, s = 0;
  for (double v : means) m += v;
  m /= means.size();
  for (double v : means) s += (v - m) * (v - m);
  return std::sqrt(s / means.size());
}

void agreement(Check& c) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    std::vector<std::string> a(20 + rng() % 100), b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = std::to_string(rng() % 3);
      b[i] = rng() % 4 == 0 ? std::to_string(rng() % 3) : a[i];
    }
    c.expect(stats::raw_agreement(a, a, 200, t).raw_agreement == 1.0, "self agreement");
    const auto ab = stats::raw_agreement(a, b, 1000, t);
    c.expect(ab.raw_agreement == stats::raw_agreement(b, a, 1000, t).raw_agreement, "symmetry");
    c.expect(std::abs(ab.std - naive_bootstrap_std(a, b, 1000)) < 0.01,
             fmt::format("bootstrap std {} vs naive {}", ab.std, naive_bootstrap_std(a, b, 1000)));
  }
}

void annotation_protocol(Check& c) {
  {
    const auto pool = testing::synthetic_pool(3000, 11, 40, false);
    corpus::AnnotationParams p;
    const auto tasks = corpus::build_annotation_set(pool, p);
    std::size_t synthetic = 0;
    std::map<std::string, std::size_t> load;
    for (const auto& t : tasks) {
      synthetic += t.is_synthetic;
      c.expect(t.annotators[0] != t.annotators[1], t.task_id + " repeats an annotator");
      for (const auto& a : t.annotators) ++load[a];
    }
    c.expect(tasks.size() == 500, "task count");
    c.expect(synthetic == 50, "synthetic count");
    c.expect(load.size() == 20, "annotator count");
    for (const auto& [a, n] : load) c.expect(n == 50, a + " load " + std::to_string(n));
  }
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto pool = testing::synthetic_pool(2500, 1000 + seed, 60, false);
    std::map<std::string, const corpus::EvalSample*> by_id;
    for (const auto& s : pool) by_id[s.id] = &s;
    corpus::AnnotationParams p;
    p.seed = seed;
    p.max_words = 50;
    const auto tasks = corpus::build_annotation_set(pool, p);
    for (const auto& t : tasks) {
      const auto* base = by_id.at(t.sample_id);
      for (const auto* text : {&t.reference, &t.hypothesis}) {
        const auto n = corpus::word_count(*text);
        c.expect(n >= 1 && n <= 50, t.task_id + " word bounds");
      }
      if (t.is_synthetic) {
        c.expect(t.hypothesis != base->hypothesis, t.task_id + " shows its own hypothesis");
      } else {
        const double wer = metrics::word_error_rate(textnorm::normalize_english(base->reference),
                                                    textnorm::normalize_english(base->hypothesis))
                               .wer;
        c.expect(wer > 60.0, t.task_id + " WER not above 60");
      }
    }
  }
}

std::size_t brute_force(const std::vector<int>& a, std::size_t i, const std::vector<int>& b, std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  std::size_t best = brute_force(a, i + 1, b, j + 1) + (a[i] == b[j] ? 0 : 1);
  best = std::min(best, brute_force(a, i, b, j + 1) + 1);
  return std::min(best, brute_force(a, i + 1, b, j) + 1);
}

void edit_distance_oracle(Check& c) {
  const auto t0 = Clock::now();
  std::vector<std::vector<int>> lists{{}}, frontier{{}};
  for (int len = 1; len <= 5; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& l : frontier) {
      for (int s = 0; s < 3; ++s) {
        next.push_back(l);
        next.back().push_back(s);
      }
    }
    lists.insert(lists.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  std::size_t bad = 0;
  for (const auto& a : lists) {
    for (const auto& b : lists) bad += metrics::edit_distance<int>(a, b) != brute_force(a, 0, b, 0);
  }
  c.expect(lists.size() == 364, "list enumeration");
  c.expect(bad == 0, std::to_string(bad) + " mismatches");
  c.expect(seconds_since(t0) < 5.0, "runtime over 5 s");
}

void end_to_end(Check& c) {
  const auto root = fs::temp_directory_path() / "hereval_acceptance_e2e";
  fs::remove_all(root);
  fs::create_directories(root);
  const auto pool = testing::synthetic_pool(100, 2024);
  corpus::write_manifest(root / "m.jsonl", pool);
  for (const char* run : {"a", "b"}) {
    const int code = shell("evaluate --manifest " + (root / "m.jsonl").string() +
                               " --mock-judge --judge both --run-id e2e --out " + (root / run).string(),
                           root / (std::string(run) + ".out"));
    c.expect(code == 0, fmt::format("run {} exited {}: {}", run, code, slurp(root / (std::string(run) + ".out"))));
  }
  for (const char* f : {"report.csv", "labels.jsonl", "samples.jsonl", "meta.json"}) {
    const auto a = slurp(root / "a" / "e2e" / f);
    c.expect(!a.empty() && a == slurp(root / "b" / "e2e" / f), std::string(f) + " differs between runs");
  }
  const auto records = corpus::load_sample_records(root / "a" / "e2e" / "samples.jsonl");
  c.expect(records.size() == 100, "sample count");
  struct Part {
    std::size_t n = 0, edits = 0, words = 0, judged = 0, he = 0;
  };
  std::map<std::pair<std::string, std::string>, Part> parts;
  for (const auto& r : records) {
    auto& p = parts[{r.model, r.dataset}];
    ++p.n;
    p.edits += r.word_edits;
    p.words += r.ref_words;
    if (r.coarse_label) {
      ++p.judged;
      p.he += *r.coarse_label == "Hallucination Error";
    }
  }
  std::istringstream csv(slurp(root / "a" / "e2e" / "report.csv"));
  std::string line;
  std::getline(csv, line);
  std::size_t rows = 0, total = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() < 8) {
      c.expect(false, "short CSV row: " + line);
      continue;
    }
    const auto it = parts.find({f[0], f[1]});
    if (it == parts.end()) {
      c.expect(false, "unexpected report row: " + line);
      continue;
    }
    const auto& p = it->second;
    c.expect(std::stoul(f[7]) == p.n, line + ": n");
    c.expect(std::abs(std::stod(f[2]) - 100.0 * p.edits / p.words) < 5e-5, line + ": wer");
    c.expect(std::abs(std::stod(f[4]) - static_cast<double>(p.he) / p.judged) < 5e-7, line + ": her");
    ++rows;
    total += p.n;
  }
  c.expect(rows == parts.size(), "report row count");
  c.expect(total == 100, "partition does not cover the manifest");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria = {
      {"golden WER", golden_wer},
      {"HER definition", her_definition},
      {"CMD properties", cmd_properties},
      {"correlation", correlation},
      {"cost model", cost_model},
      {"perturbation accuracy", perturbation},
      {"transition analysis", transitions},
      {"agreement", agreement},
      {"annotation protocol", annotation_protocol},
      {"edit-distance oracle", edit_distance_oracle},
      {"end-to-end offline", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("threw: ") + e.what());
    }
    if (c.failures.empty()) {
      std::cout << "PASS " << name << "\n";
    } else {
      ++failed;
      std::cout << "FAIL " << name << ": " << c.failures.front();
      if (c.failures.size() > 1) std::cout << " (+" << c.failures.size() - 1 << " more)";
      std::cout << "\n";
    }
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
