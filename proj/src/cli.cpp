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

#include "spectol/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spectol/experiments.hpp"
#include "spectol/metrics.hpp"

namespace spectol {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

struct ModelArgs {
  std::string preset;
  Index n = 0;
  double scale = 1.0;
  std::string sbm_b;
  std::string sizes;
  std::string latent;
  std::string graph;

  void add_to(CLI::App* cmd, bool with_graph, bool with_latent) {
    cmd->add_option("--preset", preset, "Three-block SBM preset")->check(CLI::IsMember({"figure1", "figure2"}));
    cmd->add_option("--n", n, "Vertex count for presets (figure1: 900, figure2: 2700)");
    cmd->add_option("--scale", scale, "Scale factor b applied to the preset block matrix");
    cmd->add_option("--sbm-B", sbm_b, "Block probability matrix, rows separated by ';'");
    cmd->add_option("--sizes", sizes, "Block sizes, e.g. \"300 300 300\"");
    if (with_latent) cmd->add_option("--latent", latent, "Latent position file (one row of X per line)");
    if (with_graph) cmd->add_option("--graph", graph, "Edge-list file");
  }

  bool has_model() const { return !preset.empty() || !sbm_b.empty() || !latent.empty(); }

  std::optional<SbmSpec> sbm() const {
    if (!preset.empty()) {
      if (!sbm_b.empty()) throw UsageError("--preset and --sbm-B are mutually exclusive");
      return three_block_sbm(n > 0 ? n : (preset == "figure1" ? 900 : 2700), scale);
    }
    if (!sbm_b.empty()) {
      if (sizes.empty()) throw UsageError("--sbm-B requires --sizes");
      return parse_sbm_spec(sbm_b, sizes);
    }
    return std::nullopt;
  }

  FactoredProbabilityMatrix probability() const {
    if (auto spec = sbm()) return FactoredProbabilityMatrix(sbm_to_latent(*spec));
    if (latent.empty()) throw UsageError("no model given (use --preset, --sbm-B or --latent)");
    std::ifstream in(latent);
    if (!in) throw Error("cannot open latent position file '" + latent + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      for (char& c : line) {
        if (c == ',') c = ' ';
      }
      std::istringstream ls(line);
      std::vector<double> row;
      double v;
      while (ls >> v) row.push_back(v);
      if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error("latent position file is empty");
    Matrix x(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows[0].size()) throw Error("latent position rows differ in length");
      for (std::size_t j = 0; j < rows[i].size(); ++j) x(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
    return FactoredProbabilityMatrix(LatentPositions(std::move(x)));
  }
};

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path + "'");
  return f;
}

std::optional<Index> parse_dim(const std::string& text) {
  if (text.empty() || text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const long long d = std::stoll(text, &used);
    if (used != text.size() || d < 1) throw UsageError("--dim must be a positive integer or 'auto'");
    return static_cast<Index>(d);
  } catch (const std::logic_error&) {
    throw UsageError("--dim must be a positive integer or 'auto'");
  }
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Truncated spectral decompositions of random graphs with sampling-aware stopping tolerances",
               "spectol"};
  app.require_subcommand(1);

  // sample
  ModelArgs sample_model;
  std::uint64_t sample_seed = 0;
  std::string sample_out, sample_labels;
  auto* sample = app.add_subcommand("sample", "Sample an adjacency matrix and write it as an edge list");
  sample_model.add_to(sample, false, true);
  sample->add_option("--seed", sample_seed, "Sampling seed");
  sample->add_option("--out", sample_out, "Output edge-list file")->required();
  sample->add_option("--labels", sample_labels, "Also write block labels (SBM models only)");

  // embed
  std::string embed_graph, embed_dim = "auto", embed_heuristic, embed_prefix;
  double embed_tol = 0.0;
  std::uint64_t embed_seed = 0;
  std::size_t embed_restarts = 2000;
  Index embed_block = 1;
  auto* embed = app.add_subcommand("embed", "Truncated eigendecomposition of a graph");
  embed->add_option("--graph", embed_graph, "Edge-list file")->required();
  embed->add_option("--dim", embed_dim, "Embedding dimension or 'auto'");
  auto* tol_opt = embed->add_option("--tol", embed_tol, "Relative residual tolerance");
  embed->add_option("--tol-heuristic", embed_heuristic, "Tolerance rule instead of --tol")
      ->check(CLI::IsMember({"spectral", "sqrt_n", "conservative"}))
      ->excludes(tol_opt);
  embed->add_option("--seed", embed_seed, "Starting-vector seed");
  embed->add_option("--max-restarts", embed_restarts, "Restart limit");
  embed->add_option("--block-size", embed_block, "Lanczos block size");
  embed->add_option("--out-prefix", embed_prefix, "Writes <prefix>.values and <prefix>.vectors")->required();

  // sweep
  ModelArgs sweep_model;
  std::string sweep_config_path, sweep_dim, sweep_tols, sweep_heuristic, sweep_out, sweep_summary;
  int sweep_reps = 0, sweep_threads = 0;
  Index sweep_block = 0;
  std::optional<std::uint64_t> sweep_seed;
  bool sweep_scaled = false, sweep_timing = false;
  auto* sweep = app.add_subcommand("sweep", "Procrustes error and cost across stopping tolerances");
  sweep->add_option("--config", sweep_config_path, "Config file (key = value lines or JSON)");
  sweep_model.add_to(sweep, true, false);
  sweep->add_option("--dim", sweep_dim, "Embedding dimension or 'auto'");
  sweep->add_option("--tolerances", sweep_tols, "e.g. 2^-1..2^-20 or a comma list");
  sweep->add_option("--replicates", sweep_reps, "Independent graph samples");
  sweep->add_option("--seed", sweep_seed, "Base seed");
  sweep->add_option("--heuristic", sweep_heuristic, "Heuristic marked in the summary")
      ->check(CLI::IsMember({"spectral", "sqrt_n", "conservative"}));
  sweep->add_flag("--scaled", sweep_scaled, "Also compare scaled embeddings");
  sweep->add_flag("--timing", sweep_timing, "Record wall-clock time per run (output no longer reproducible)");
  sweep->add_option("--threads", sweep_threads, "Replicates run in parallel");
  sweep->add_option("--block-size", sweep_block, "Lanczos block size");
  sweep->add_option("--out", sweep_out, "Record CSV (default: stdout)");
  sweep->add_option("--summary", sweep_summary, "Per-tolerance summary CSV");

  // cluster-stability
  ModelArgs stab_model;
  std::string stab_dim = "auto", stab_tols, stab_heuristic = "spectral", stab_out;
  double stab_ref = 1e-6;
  int stab_reps = 10, stab_kmin = 2, stab_kmax = 8, stab_threads = 1;
  std::uint64_t stab_seed = 0;
  auto* stab = app.add_subcommand("cluster-stability", "ARI of k-means clusterings across tolerances");
  stab_model.add_to(stab, true, true);
  stab->add_option("--dim", stab_dim, "Embedding dimension or 'auto'");
  stab->add_option("--tolerances", stab_tols, "e.g. 2^-1..2^-20");
  stab->add_option("--reference-tol", stab_ref, "Tolerance of the reference clustering");
  stab->add_option("--repetitions", stab_reps, "Repetitions with distinct seeds");
  stab->add_option("--k-min", stab_kmin, "Smallest cluster count tried");
  stab->add_option("--k-max", stab_kmax, "Largest cluster count tried");
  stab->add_option("--seed", stab_seed, "Seed (also samples synthetic models)");
  stab->add_option("--heuristic", stab_heuristic, "Heuristic tolerance reported")
      ->check(CLI::IsMember({"spectral", "sqrt_n", "conservative"}));
  stab->add_option("--threads", stab_threads, "Repetitions run in parallel");
  stab->add_option("--out", stab_out, "CSV output (default: stdout)");

  // check
  ModelArgs check_model;
  std::string check_dim, check_out;
  double check_c0 = 0.0, check_a = 0.0;
  std::uint64_t check_seed = 0;
  auto* check = app.add_subcommand("check", "Assumption and tolerance report as JSON");
  check_model.add_to(check, true, true);
  check->add_option("--dim", check_dim, "Dimension d (default: rank of P, or auto for graphs)");
  check->add_option("--c0", check_c0, "Eigengap constant c0")->required();
  check->add_option("--a", check_a, "Degree exponent slack a")->required();
  check->add_option("--seed", check_seed, "Seed (also samples synthetic models)");
  check->add_option("--out", check_out, "JSON output (default: stdout)");

  std::vector<const char*> argv;
  argv.push_back("spectol");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "spectol: " << e.what() << '\n';
    return 2;
  }

  auto load_graph = [](const ModelArgs& m, std::uint64_t seed,
                       std::optional<FactoredProbabilityMatrix>& p) -> SparseGraph {
    if (!m.graph.empty()) {
      if (m.has_model()) throw UsageError("--graph cannot be combined with a model");
      return ingest_edge_list(m.graph).graph;
    }
    p.emplace(m.probability());
    return sample_adjacency(*p, seed);
  };

  try {
    if (*sample) {
      const auto p = sample_model.probability();
      const auto g = sample_adjacency(p, sample_seed);
      auto f = open_output(sample_out);
      write_edge_list(f, g);
      if (!sample_labels.empty()) {
        const auto spec = sample_model.sbm();
        if (!spec) throw UsageError("--labels needs an SBM model");
        auto lf = open_output(sample_labels);
        for (int l : spec->labels()) lf << l << '\n';
      }
      out << "wrote " << g.n() << " vertices, " << g.m() << " edges to " << sample_out << '\n';
    } else if (*embed) {
      const auto in = ingest_edge_list(embed_graph);
      const SparseGraph& g = in.graph;
      const auto dim = parse_dim(embed_dim);
      const Index d = dim ? *dim : choose_dimension(g, embed_seed);
      double tol = embed_tol;
      std::string rule = "fixed";
      if (!embed_heuristic.empty() || !(tol > 0.0)) {
        rule = embed_heuristic.empty() ? "spectral" : embed_heuristic;
        const auto variant = parse_heuristic_variant(rule);
        if (variant == HeuristicVariant::Conservative) {
          tol = conservative_tolerance(g);
        } else {
          tol = tolerance_report(g, embed_seed).value(variant);
        }
      }
      LanczosOptions opts;
      opts.seed = embed_seed;
      opts.max_restarts = embed_restarts;
      opts.block_size = embed_block;
      const auto dec = truncated_eigs(g, d, tol, opts);
      {
        auto f = open_output(embed_prefix + ".values");
        for (Index i = 0; i < dec.values.size(); ++i) f << format_double(dec.values(i)) << '\n';
      }
      {
        auto f = open_output(embed_prefix + ".vectors");
        for (Index i = 0; i < dec.vectors.rows(); ++i) {
          f << in.original_ids[static_cast<std::size_t>(i)];
          for (Index c = 0; c < dec.vectors.cols(); ++c) f << ' ' << format_double(dec.vectors(i, c));
          f << '\n';
        }
      }
      nlohmann::json j;
      j["n"] = g.n();
      j["d"] = d;
      j["tolerance"] = tol;
      j["tolerance_rule"] = rule;
      j["iterations"] = dec.iterations;
      j["matvecs"] = dec.matvecs;
      j["residual"] = dec.residual;
      j["relative_residual"] = dec.relative_residual();
      j["krylov_dim"] = dec.krylov_dim;
      j["converged"] = dec.converged;
      out << j.dump() << '\n';
      if (!dec.converged) {
        err << "spectol: no convergence within " << embed_restarts << " restarts\n";
        return 1;
      }
    } else if (*sweep) {
      SweepConfig cfg;
      if (!sweep_config_path.empty()) {
        std::ifstream f(sweep_config_path);
        if (!f) throw Error("cannot open config '" + sweep_config_path + "'");
        std::stringstream text;
        text << f.rdbuf();
        cfg = parse_sweep_config(text.str());
      }
      if (auto spec = sweep_model.sbm()) {
        cfg.model = *spec;
        cfg.edge_list.clear();
      }
      if (!sweep_model.graph.empty()) {
        if (sweep_model.has_model()) throw UsageError("--graph cannot be combined with a model");
        cfg.model.reset();
        cfg.edge_list = sweep_model.graph;
      }
      if (!sweep_dim.empty()) cfg.d = parse_dim(sweep_dim);
      if (!sweep_tols.empty()) cfg.tolerances = parse_tolerance_list(sweep_tols);
      if (sweep_reps > 0) cfg.replicates = sweep_reps;
      if (sweep_seed) cfg.seed = *sweep_seed;
      if (!sweep_heuristic.empty()) cfg.heuristic = parse_heuristic_variant(sweep_heuristic);
      if (sweep_scaled) cfg.scaled = true;
      if (sweep_timing) cfg.timing = true;
      if (sweep_threads > 0) cfg.threads = sweep_threads;
      if (sweep_block > 0) cfg.block_size = sweep_block;
      if (!sweep_out.empty()) cfg.output = sweep_out;
      if (!cfg.model && cfg.edge_list.empty()) throw UsageError("sweep needs --config, a model or --graph");
      cfg.validate();
      const auto result = run_tolerance_sweep(cfg);
      if (cfg.output.empty()) write_sweep_csv(out, result.records, cfg.scaled);
      if (!sweep_summary.empty()) {
        auto f = open_output(sweep_summary);
        write_sweep_summary_csv(f, result);
      }
    } else if (*stab) {
      std::optional<FactoredProbabilityMatrix> p;
      const SparseGraph g = load_graph(stab_model, stab_seed, p);
      StabilityConfig cfg;
      cfg.d = parse_dim(stab_dim);
      if (!stab_tols.empty()) cfg.tolerances = parse_tolerance_list(stab_tols);
      cfg.reference_tol = stab_ref;
      cfg.repetitions = stab_reps;
      cfg.seed = stab_seed;
      cfg.heuristic = parse_heuristic_variant(stab_heuristic);
      cfg.threads = stab_threads;
      if (stab_kmin < 2 || stab_kmax < stab_kmin) throw UsageError("need 2 <= --k-min <= --k-max");
      cfg.k_range.clear();
      for (int k = stab_kmin; k <= stab_kmax; ++k) cfg.k_range.push_back(k);
      const auto result = run_clustering_stability(g, cfg);
      if (stab_out.empty()) {
        write_stability_csv(out, result);
      } else {
        auto f = open_output(stab_out);
        write_stability_csv(f, result);
      }
    } else if (*check) {
      std::optional<FactoredProbabilityMatrix> p;
      const SparseGraph g = load_graph(check_model, check_seed, p);
      Index d = 0;
      if (auto dim = parse_dim(check_dim)) {
        d = *dim;
      } else if (p) {
        d = std::max<Index>(1, check_assumptions(*p, 1, check_c0, check_a).rank);
      } else {
        d = choose_dimension(g, check_seed);
      }
      const auto r = run_check(g, p ? &*p : nullptr, d, check_c0, check_a, check_seed);
      nlohmann::ordered_json j;
      j["n"] = r.n;
      j["m"] = r.m;
      j["delta_A"] = r.delta_a;
      j["lambda1_hat"] = r.lambda1_hat;
      j["gamma"] = number_or_null(r.gamma);
      j["heuristic_spectral"] = number_or_null(r.heuristic_spectral);
      j["heuristic_sqrt_n"] = number_or_null(r.heuristic_sqrt_n);
      j["conservative"] = r.conservative;
      j["rank_check"] = r.rank_check ? nlohmann::ordered_json(*r.rank_check) : nlohmann::ordered_json(nullptr);
      j["gamma_check"] = r.gamma_check;
      j["delta_check"] = r.delta_check;
      if (check_out.empty()) {
        out << j.dump(2) << '\n';
      } else {
        auto f = open_output(check_out);
        f << j.dump(2) << '\n';
      }
    }
  } catch (const UsageError& e) {
    err << "spectol: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "spectol: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace spectol
