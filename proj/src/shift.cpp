// src/shift.cpp

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

#include "hereval/shift.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hereval/error.hpp"
#include "hereval/kernels.hpp"
#include "hereval/metrics.hpp"

namespace hereval::shift {
namespace {

std::vector<double> layer_means(const EmbeddingLayer& layer, Parallelism par) {
  return par == Parallelism::OpenMP ? kernels::omp::column_means(layer.data, layer.count(), layer.dim)
                                    : kernels::serial::column_means(layer.data, layer.count(), layer.dim);
}

std::vector<double> layer_moments(const EmbeddingLayer& layer, std::span<const double> means, int order,
                                  Parallelism par) {
  return par == Parallelism::OpenMP
             ? kernels::omp::column_central_moments(layer.data, layer.count(), layer.dim, means, order)
             : kernels::serial::column_central_moments(layer.data, layer.count(), layer.dim, means, order);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void check_compatible(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  a.validate();
  b.validate();
  if (a.layers.size() != b.layers.size()) {
    throw ValidationError(fmt::format("cmd: layer count mismatch ({} has {}, {} has {})", a.domain,
                                      a.layers.size(), b.domain, b.layers.size()));
  }
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    if (a.layers[l].dim != b.layers[l].dim) {
      throw ValidationError(fmt::format("cmd: dimension mismatch in layer {} ({} vs {})", l,
                                        a.layers[l].dim, b.layers[l].dim));
    }
  }
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

std::optional<double> try_correlation(const std::vector<double>& x, const std::vector<double>& y,
                                      CorrelationKind kind) {
  if (x.size() < 2) return std::nullopt;
  try {
    return kind == CorrelationKind::Pearson ? pearson(x, y) : spearman(x, y);
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

std::string opt_num(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : ""; }

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void EmbeddingMatrix::validate() const {
  if (layers.empty()) throw ValidationError("embeddings for '" + domain + "' have no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.dim == 0) throw ValidationError(fmt::format("'{}' layer {} has dimension 0", domain, l));
    if (layer.data.empty()) throw ValidationError(fmt::format("'{}' layer {} is empty", domain, l));
    if (layer.data.size() % layer.dim != 0) {
      throw ValidationError(fmt::format("'{}' layer {} is ragged", domain, l));
    }
  }
}

ShiftScore cmd(const EmbeddingMatrix& source, const EmbeddingMatrix& target, Parallelism par) {
  return cmd_higher_order(source, target, 1, par);
}

ShiftScore cmd_higher_order(const EmbeddingMatrix& source, const EmbeddingMatrix& target, int max_order,
                            Parallelism par) {
  if (max_order < 1) throw ValidationError("cmd: moment order must be >= 1");
  check_compatible(source, target);
  double total = 0.0;
  for (std::size_t l = 0; l < source.layers.size(); ++l) {
    const auto ms = layer_means(source.layers[l], par);
    const auto mt = layer_means(target.layers[l], par);
    double term = squared_distance(ms, mt);
    for (int k = 2; k <= max_order; ++k) {
      term += squared_distance(layer_moments(source.layers[l], ms, k, par),
                               layer_moments(target.layers[l], mt, k, par));
    }
    total += term;
  }
  return {source.domain, target.domain, total / static_cast<double>(source.layers.size())};
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("correlation: coordinate length mismatch");
  if (x.size() < 2) throw ValidationError("correlation: need at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("correlation: zero variance (degenerate input)");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

CorrelationResult correlation(const std::vector<Point>& points, CorrelationKind kind) {
  std::vector<double> x, y;
  x.reserve(points.size());
  y.reserve(points.size());
  for (const auto& p : points) {
    x.push_back(p.shift);
    y.push_back(p.degradation);
  }
  CorrelationResult r;
  r.kind = kind;
  r.n_points = points.size();
  r.alpha = kind == CorrelationKind::Pearson ? pearson(x, y) : spearman(x, y);
  return r;
}

ShiftTable shift_degradation_table(const std::vector<DomainRates>& reports,
                                   const std::map<std::string, EmbeddingMatrix>& embeddings,
                                   const std::string& source_domain, CorrelationKind kind) {
  const auto src_emb = embeddings.find(source_domain);
  if (src_emb == embeddings.end()) {
    throw ValidationError("shift: no embeddings for source domain '" + source_domain + "'");
  }
  std::map<std::string, const DomainRates*> source_rates;
  for (const auto& r : reports) {
    if (r.dataset == source_domain) source_rates[r.model] = &r;
  }
  if (source_rates.empty()) {
    throw ValidationError("shift: no report rows for source domain '" + source_domain + "'");
  }

  ShiftTable table;
  table.source = source_domain;
  std::map<std::string, double> cmd_cache;
  for (const auto& r : reports) {
    if (r.dataset == source_domain) continue;
    const auto src = source_rates.find(r.model);
    if (src == source_rates.end()) continue;
    auto cached = cmd_cache.find(r.dataset);
    if (cached == cmd_cache.end()) {
      const auto tgt_emb = embeddings.find(r.dataset);
      if (tgt_emb == embeddings.end()) {
        throw ValidationError("shift: no embeddings for target domain '" + r.dataset + "'");
      }
      cached = cmd_cache.emplace(r.dataset, cmd(src_emb->second, tgt_emb->second).cmd).first;
    }
    ShiftRow row;
    row.model = r.model;
    row.target = r.dataset;
    row.cmd = cached->second;
    row.werd = metrics::werd(src->second->wer, r.wer);
    if (src->second->her && r.her) row.herd = metrics::herd(*src->second->her, *r.her);
    table.rows.push_back(std::move(row));
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const ShiftRow& a, const ShiftRow& b) {
    return std::tie(a.model, a.target) < std::tie(b.model, b.target);
  });

  auto pooled = [&](bool herd_metric) {
    std::vector<double> x, y;
    for (const auto& row : table.rows) {
      if (herd_metric && !row.herd) continue;
      x.push_back(row.cmd);
      y.push_back(herd_metric ? *row.herd : row.werd);
    }
    return try_correlation(x, y, kind);
  };
  auto per_model = [&](bool herd_metric) -> std::optional<double> {
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (const auto& row : table.rows) {
      if (herd_metric && !row.herd) continue;
      auto& g = groups[row.model];
      g.first.push_back(row.cmd);
      g.second.push_back(herd_metric ? *row.herd : row.werd);
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [model, g] : groups) {
      if (auto a = try_correlation(g.first, g.second, kind)) {
        sum += *a;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  table.alpha_werd_pooled = pooled(false);
  table.alpha_herd_pooled = pooled(true);
  table.alpha_werd_per_model = per_model(false);
  table.alpha_herd_per_model = per_model(true);
  return table;
}

std::string to_csv(const ShiftTable& table) {
  std::string out = "model,source,target,cmd,werd,herd\n";
  for (const auto& r : table.rows) {
    out += fmt::format("{},{},{},{},{},{}\n", r.model, table.source, r.target, r.cmd, r.werd, opt_num(r.herd));
  }
  out += fmt::format("# alpha_werd_pooled,{}\n", opt_num(table.alpha_werd_pooled));
  out += fmt::format("# alpha_herd_pooled,{}\n", opt_num(table.alpha_herd_pooled));
  out += fmt::format("# alpha_werd_per_model,{}\n", opt_num(table.alpha_werd_per_model));
  out += fmt::format("# alpha_herd_per_model,{}\n", opt_num(table.alpha_herd_per_model));
  return out;
}

std::string to_json(const ShiftTable& table) {
  nlohmann::json j;
  j["source"] = table.source;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : table.rows) {
    j["rows"].push_back({{"model", r.model}, {"target", r.target}, {"cmd", r.cmd}, {"werd", r.werd},
                         {"herd", opt_json(r.herd)}});
  }
  j["alpha"] = {{"werd_pooled", opt_json(table.alpha_werd_pooled)},
                {"herd_pooled", opt_json(table.alpha_herd_pooled)},
                {"werd_per_model", opt_json(table.alpha_werd_per_model)},
                {"herd_per_model", opt_json(table.alpha_herd_per_model)}};
  return j.dump(2) + "\n";
}

EmbeddingMatrix load_embedding_header(const std::filesystem::path& header_json) {
  std::ifstream in(header_json);
  if (!in) throw ValidationError("cannot open " + header_json.string());
  nlohmann::json h;
  try {
    in >> h;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(header_json.string() + ": " + e.what());
  }
  EmbeddingMatrix m;
  try {
    m.domain = h.at("domain").get<std::string>();
    const auto layers = h.at("L").get<std::size_t>();
    const auto counts = h.at("counts").get<std::vector<std::size_t>>();
    std::vector<std::size_t> dims;
    if (h.at("d").is_array()) {
      dims = h.at("d").get<std::vector<std::size_t>>();
    } else {
      dims.assign(layers, h.at("d").get<std::size_t>());
    }
    if (counts.size() != layers || dims.size() != layers) {
      throw ValidationError(header_json.string() + ": counts/d must have L entries");
    }
    const std::string payload_name = h.value("payload", m.domain + ".f32");
    const auto payload = header_json.parent_path() / payload_name;
    std::ifstream bin(payload, std::ios::binary);
    if (!bin) throw ValidationError("cannot open payload " + payload.string());
    for (std::size_t l = 0; l < layers; ++l) {
      EmbeddingLayer layer;
      layer.dim = dims[l];
      layer.data.resize(counts[l] * dims[l]);
      bin.read(reinterpret_cast<char*>(layer.data.data()),
               static_cast<std::streamsize>(layer.data.size() * sizeof(float)));
      if (!bin) throw ValidationError(payload.string() + ": payload shorter than header declares");
      if constexpr (std::endian::native == std::endian::big) {
        for (float& f : layer.data) {
          std::uint32_t u;
          std::memcpy(&u, &f, 4);
          u = __builtin_bswap32(u);
          std::memcpy(&f, &u, 4);
        }
      }
      m.layers.push_back(std::move(layer));
    }
    bin.peek();
    if (!bin.eof()) throw ValidationError(payload.string() + ": payload longer than header declares");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(header_json.string() + ": " + e.what());
  }
  m.validate();
  return m;
}

EmbeddingMatrix load_embedding_csv(const std::string& domain,
                                   const std::vector<std::filesystem::path>& layer_files) {
  EmbeddingMatrix m;
  m.domain = domain;
  for (const auto& path : layer_files) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    EmbeddingLayer layer;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      std::vector<float> row;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) {
        try {
          row.push_back(std::stof(cell));
        } catch (const std::exception&) {
          throw ValidationError(fmt::format("{}:{}: bad number '{}'", path.string(), lineno, cell));
        }
      }
      if (layer.dim == 0) layer.dim = row.size();
      if (row.size() != layer.dim) {
        throw ValidationError(fmt::format("{}:{}: expected {} values, got {}", path.string(), lineno,
                                          layer.dim, row.size()));
      }
      layer.data.insert(layer.data.end(), row.begin(), row.end());
    }
    m.layers.push_back(std::move(layer));
  }
  m.validate();
  return m;
}

std::map<std::string, EmbeddingMatrix> load_embedding_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError("not a directory: " + dir.string());
  std::map<std::string, EmbeddingMatrix> out;
  std::map<std::string, std::map<int, std::filesystem::path>> csv_layers;
  static const std::regex csv_name(R"((.+)\.layer(\d+)\.csv)");
  std::vector<std::filesystem::path> entries;
  for (const auto& e : std::filesystem::directory_iterator(dir)) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());
  for (const auto& p : entries) {
    const std::string name = p.filename().string();
    std::smatch match;
    if (p.extension() == ".json") {
      auto m = load_embedding_header(p);
      const std::string domain = m.domain;
      if (!out.emplace(domain, std::move(m)).second) {
        throw ValidationError("duplicate embeddings for domain '" + domain + "'");
      }
    } else if (std::regex_match(name, match, csv_name)) {
      csv_layers[match[1]][std::stoi(match[2])] = p;
    }
  }
  for (const auto& [domain, layers] : csv_layers) {
    std::vector<std::filesystem::path> files;
    int expect = 0;
    for (const auto& [k, path] : layers) {
      if (k != expect++) throw ValidationError("missing CSV layer " + std::to_string(expect - 1) + " for " + domain);
      files.push_back(path);
    }
    if (!out.emplace(domain, load_embedding_csv(domain, files)).second) {
      throw ValidationError("duplicate embeddings for domain '" + domain + "'");
    }
  }
  return out;
}

void save_embedding(const EmbeddingMatrix& m, const std::filesystem::path& dir) {
  m.validate();
  std::filesystem::create_directories(dir);
  nlohmann::json h;
  h["domain"] = m.domain;
  h["L"] = m.layers.size();
  std::vector<std::size_t> dims, counts;
  for (const auto& l : m.layers) {
    dims.push_back(l.dim);
    counts.push_back(l.count());
  }
  h["d"] = dims;
  h["counts"] = counts;
  h["payload"] = m.domain + ".f32";
  std::ofstream(dir / (m.domain + ".json")) << h.dump(2) << "\n";
  std::ofstream bin(dir / (m.domain + ".f32"), std::ios::binary);
  for (const auto& l : m.layers) {
    for (float f : l.data) {
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
      bin.write(reinterpret_cast<const char*>(&u), 4);
    }
  }
}

}  // namespace hereval::shift
