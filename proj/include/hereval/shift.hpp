// include/hereval/shift.hpp

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

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hereval::shift {

/// One layer of embeddings: `count` row-major vectors of dimension `dim`.
struct EmbeddingLayer {
  std::size_t dim = 0;
  std::vector<float> data;

  std::size_t count() const { return dim == 0 ? 0 : data.size() / dim; }
};

struct EmbeddingMatrix {
  std::string domain;
  std::vector<EmbeddingLayer> layers;

  /// Throws ValidationError when a layer is empty or ragged.
  void validate() const;
};

struct ShiftScore {
  std::string source;
  std::string target;
  double cmd = 0.0;
};

enum class Parallelism { Serial, OpenMP };

/// Mean over layers of the squared L2 distance between per-layer mean
/// vectors. Layer count and per-layer dimensions must match.
ShiftScore cmd(const EmbeddingMatrix& source, const EmbeddingMatrix& target,
               Parallelism par = Parallelism::OpenMP);

/// Extension beyond first moments: adds the squared distance between
/// per-column central moments of orders 2..max_order. max_order == 1 is
/// exactly cmd().
ShiftScore cmd_higher_order(const EmbeddingMatrix& source, const EmbeddingMatrix& target,
                            int max_order, Parallelism par = Parallelism::OpenMP);

enum class DegradationMetric { Werd, Herd };
enum class CorrelationKind { Pearson, Spearman };

struct Point {
  double shift = 0.0;
  double degradation = 0.0;
};

struct CorrelationResult {
  double alpha = 0.0;
  std::size_t n_points = 0;
  CorrelationKind kind = CorrelationKind::Pearson;
};

/// Throws ValidationError for fewer than two points or zero variance.
CorrelationResult correlation(const std::vector<Point>& points,
                              CorrelationKind kind = CorrelationKind::Pearson);

double pearson(const std::vector<double>& x, const std::vector<double>& y);
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Per-(model, dataset) rates as read from run reports.
struct DomainRates {
  std::string model;
  std::string dataset;
  double wer = 0.0;
  std::optional<double> her;  // fraction
};

struct ShiftRow {
  std::string model;
  std::string target;
  double cmd = 0.0;
  double werd = 0.0;
  std::optional<double> herd;
};

struct ShiftTable {
  std::string source;
  std::vector<ShiftRow> rows;
  // All rows pooled into one correlation.
  std::optional<double> alpha_werd_pooled;
  std::optional<double> alpha_herd_pooled;
  // Correlation per model, then averaged over models with a defined value.
  std::optional<double> alpha_werd_per_model;
  std::optional<double> alpha_herd_per_model;
};

/// One row per (model, target dataset). Alphas are absent when fewer than two
/// rows exist or a coordinate has zero variance.
ShiftTable shift_degradation_table(const std::vector<DomainRates>& reports,
                                   const std::map<std::string, EmbeddingMatrix>& embeddings,
                                   const std::string& source_domain,
                                   CorrelationKind kind = CorrelationKind::Pearson);

std::string to_csv(const ShiftTable& table);
std::string to_json(const ShiftTable& table);

// Embedding ingestion.
//
// Binary: <domain>.json header {"domain", "L", "d", "counts", "payload"?}
// plus a float32 little-endian payload (default <domain>.f32) holding the
// layers back to back, each counts[l] x d row-major. "d" may be a single
// integer or one per layer.
//
// CSV: <domain>.layer<k>.csv, one vector per line, k = 0..L-1.
EmbeddingMatrix load_embedding_header(const std::filesystem::path& header_json);
EmbeddingMatrix load_embedding_csv(const std::string& domain,
                                   const std::vector<std::filesystem::path>& layer_files);
std::map<std::string, EmbeddingMatrix> load_embedding_dir(const std::filesystem::path& dir);

void save_embedding(const EmbeddingMatrix& m, const std::filesystem::path& dir);

}  // namespace hereval::shift
