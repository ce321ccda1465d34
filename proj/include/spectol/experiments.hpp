// Copyright 2026 The spectol Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Tolerance-sweep and clustering-stability experiments, edge-list ingestion,
// and the CSV / config formats they exchange.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spectol/graph_model.hpp"
#include "spectol/spectral.hpp"
#include "spectol/tolerance.hpp"

namespace spectol {

/// splitmix64 step; derives independent per-replicate seeds from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// {2^-first, ..., 2^-last}.
std::vector<double> power_of_two_tolerances(int first, int last);

/// Three equal blocks, 0.05 within and 0.02 between, scaled by `scale`.
SbmSpec three_block_sbm(Index n, double scale = 1.0);

/// "2^-1..2^-20" or a comma / space separated list ("0.1, 2^-5").
std::vector<double> parse_tolerance_list(const std::string& text);

/// B as rows separated by ';' ("0.05 0.02; 0.02 0.05"), sizes as "300 300".
SbmSpec parse_sbm_spec(const std::string& b, const std::string& sizes);

HeuristicVariant parse_heuristic_variant(const std::string& name);
std::string to_string(HeuristicVariant v);

// ---------------------------------------------------------------------------
// Edge lists

struct IngestOptions {
  std::string comment_prefix = "#";
  enum class Base { Auto, Zero, One } base = Base::Auto;
};

struct IngestResult {
  SparseGraph graph;
  std::vector<std::int64_t> original_ids;  // original id of compacted vertex i
  std::size_t self_loops_dropped = 0;
  std::size_t duplicate_edges = 0;
  int detected_base = 0;  // smallest original id seen, clipped to {0, 1}
};

/// Undirected, deduplicated, self-loops dropped, ids compacted to 0..n-1.
IngestResult ingest_edge_list(std::istream& in, const IngestOptions& opts = {});
IngestResult ingest_edge_list(const std::string& path, const IngestOptions& opts = {});

void write_edge_list(std::ostream& out, const SparseGraph& g);

// ---------------------------------------------------------------------------
// Tolerance sweep

struct SweepConfig {
  std::optional<SbmSpec> model;    // synthetic model; P is known
  std::string edge_list;           // used when `model` is empty
  std::optional<Index> d;          // empty: Zhu-Ghodsi on a pilot decomposition
  std::vector<double> tolerances = power_of_two_tolerances(1, 20);
  int replicates = 1;
  std::uint64_t seed = 0;
  HeuristicVariant heuristic = HeuristicVariant::Spectral;
  std::string output;
  bool scaled = false;             // also compare U |S|^1/2 against V Sigma^1/2
  bool timing = false;             // elapsed_ms is NaN unless set
  int threads = 1;
  Index dense_oracle_max_n = 1000; // rho needs the full spectrum of A
  std::size_t max_restarts = 2000;
  Index block_size = 1;

  void validate() const;
};

/// Flat `key = value` lines or a JSON object; keys mirror SweepConfig fields.
SweepConfig parse_sweep_config(const std::string& text);

struct SweepRecord {
  double tolerance = 0.0;
  double tol_exponent = 0.0;  // -log2(tolerance)
  int replicate = 0;
  std::size_t iterations = 0;
  std::size_t matvecs = 0;
  double procrustes_error = 0.0;
  double residual = 0.0;       // ||A U - U S||_2
  double rho = 0.0;
  double elapsed_ms = 0.0;
  double scaled_procrustes_error = 0.0;
  double lambda1 = 0.0;
  bool converged = false;
};

struct SweepSummaryRow {
  double tolerance = 0.0;
  double tol_exponent = 0.0;
  int count = 0;
  double mean_error = 0.0;
  double se_error = 0.0;
  double mean_iterations = 0.0;
  double se_iterations = 0.0;
  double mean_matvecs = 0.0;
  double mean_rho = 0.0;
  double mean_bound_ratio = 0.0;  // (eps / rho) / (C(P) / ||A||_2)
  double converged_fraction = 0.0;
  bool at_or_below_heuristic = false;
};

struct SweepResult {
  Index d = 0;
  std::vector<SweepRecord> records;  // replicate-major, then tolerance order
  std::vector<SweepSummaryRow> summary;
  HeuristicVariant heuristic = HeuristicVariant::Spectral;
  double heuristic_tolerance = 0.0;  // from the mean lambda_1 over replicates
  double mean_lambda1 = 0.0;
  double cp = 0.0;                   // C(P), NaN without a model
};

SweepResult run_tolerance_sweep(const SweepConfig& config);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records, bool scaled = false);
std::vector<SweepRecord> read_sweep_csv(std::istream& in);
void write_sweep_summary_csv(std::ostream& out, const SweepResult& result);

// ---------------------------------------------------------------------------
// Clustering stability

struct StabilityConfig {
  std::optional<Index> d;
  std::vector<double> tolerances = power_of_two_tolerances(1, 20);
  double reference_tol = 1e-6;
  std::uint64_t seed = 0;
  int repetitions = 10;
  std::vector<int> k_range = {2, 3, 4, 5, 6, 7, 8};
  HeuristicVariant heuristic = HeuristicVariant::Spectral;
  std::size_t max_restarts = 2000;
  int threads = 1;
};

struct StabilityRow {
  double tolerance = 0.0;
  double tol_exponent = 0.0;
  double mean_ari_reference = 0.0;
  double se_ari_reference = 0.0;
  double mean_ari_consecutive = 0.0;  // vs. the previous tolerance; NaN for the first
  double se_ari_consecutive = 0.0;
  double mean_k = 0.0;
  double mean_iterations = 0.0;
};

struct StabilityResult {
  Index d = 0;
  double heuristic_tolerance = 0.0;
  double reference_mean_k = 0.0;
  std::vector<StabilityRow> rows;
  std::vector<std::vector<double>> ari_reference;    // [repetition][tolerance]
  std::vector<std::vector<double>> ari_consecutive;  // [repetition][tolerance]
};

StabilityResult run_clustering_stability(const SparseGraph& graph, const StabilityConfig& config);

void write_stability_csv(std::ostream& out, const StabilityResult& result);

// ---------------------------------------------------------------------------
// Assumption / tolerance report

struct CheckReport {
  Index n = 0;
  Index m = 0;
  double delta_a = 0.0;
  double lambda1_hat = 0.0;
  double gamma = 0.0;
  double heuristic_spectral = 0.0;
  double heuristic_sqrt_n = 0.0;
  double conservative = 0.0;
  std::optional<bool> rank_check;  // needs P
  bool gamma_check = false;
  bool delta_check = false;
};

/// With `p`, the eigengap and degree checks apply to P; otherwise to A.
CheckReport run_check(const SparseGraph& a, const FactoredProbabilityMatrix* p, Index d, double c0,
                      double a_exponent, std::uint64_t seed);

/// Embedding dimension from the profile-likelihood elbow of the top
/// `scree_size` eigenvalue magnitudes of A.
Index choose_dimension(const SparseGraph& a, std::uint64_t seed, Index scree_size = 30);

/// Formats with 17 significant digits so values round-trip exactly.
std::string format_double(double v);

}  // namespace spectol
