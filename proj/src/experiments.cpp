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

#include "spectol/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "spectol/metrics.hpp"

namespace spectol {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Runs fn(i) for i in [0, count) on up to `threads` workers. Returns one
// exception slot per index.
template <typename Fn>
std::vector<std::exception_ptr> parallel_for(int count, int threads, Fn&& fn) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(threads, 1, std::max(1, count));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return errors;
}

struct MeanSe {
  double mean = kNaN;
  double se = kNaN;
  int count = 0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  double sum = 0.0;
  for (double x : xs) {
    if (std::isfinite(x)) {
      sum += x;
      ++out.count;
    }
  }
  if (out.count == 0) return out;
  out.mean = sum / out.count;
  double ss = 0.0;
  for (double x : xs) {
    if (std::isfinite(x)) ss += (x - out.mean) * (x - out.mean);
  }
  out.se = out.count > 1 ? std::sqrt(ss / (out.count - 1) / out.count) : 0.0;
  return out;
}

double elapsed_ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

Matrix parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream all(text);
  std::string row;
  while (std::getline(all, row, ';')) {
    std::replace(row.begin(), row.end(), ',', ' ');
    std::istringstream in(row);
    std::vector<double> vals;
    double v;
    while (in >> v) vals.push_back(v);
    if (!in.eof()) throw InvalidArgument("cannot parse matrix row '" + trim(row) + "'");
    if (!vals.empty()) rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw InvalidArgument("empty matrix");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw InvalidArgument("ragged matrix");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return m;
}

std::vector<Index> parse_sizes(const std::string& text) {
  std::string s = text;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<Index> out;
  long long v;
  while (in >> v) out.push_back(static_cast<Index>(v));
  if (!in.eof() || out.empty()) throw InvalidArgument("cannot parse block sizes '" + text + "'");
  return out;
}

double parse_tolerance_token(const std::string& tok) {
  const std::string t = trim(tok);
  if (t.rfind("2^", 0) == 0) return std::exp2(std::stod(t.substr(2)));
  std::size_t used = 0;
  const double v = std::stod(t, &used);
  if (used != t.size()) throw InvalidArgument("bad tolerance '" + t + "'");
  return v;
}

bool parse_bool(const std::string& text) {
  const std::string t = trim(text);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw InvalidArgument("bad boolean '" + text + "'");
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> power_of_two_tolerances(int first, int last) {
  std::vector<double> out;
  const int step = last >= first ? 1 : -1;
  for (int k = first;; k += step) {
    out.push_back(std::exp2(-k));
    if (k == last) break;
  }
  return out;
}

SbmSpec three_block_sbm(Index n, double scale) {
  if (n < 3 || n % 3 != 0) throw InvalidArgument("three_block_sbm: n must be a positive multiple of 3");
  Matrix b = Matrix::Constant(3, 3, 0.02);
  b.diagonal().setConstant(0.05);
  return SbmSpec(b * scale, {n / 3, n / 3, n / 3});
}

HeuristicVariant parse_heuristic_variant(const std::string& name) {
  if (name == "spectral") return HeuristicVariant::Spectral;
  if (name == "sqrt_n") return HeuristicVariant::SqrtN;
  if (name == "conservative") return HeuristicVariant::Conservative;
  throw InvalidArgument("unknown heuristic variant '" + name + "'");
}

std::string to_string(HeuristicVariant v) {
  switch (v) {
    case HeuristicVariant::Spectral: return "spectral";
    case HeuristicVariant::SqrtN: return "sqrt_n";
    case HeuristicVariant::Conservative: return "conservative";
  }
  return "unknown";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Edge lists

IngestResult ingest_edge_list(std::istream& in, const IngestOptions& opts) {
  IngestResult out;
  std::vector<std::pair<std::int64_t, std::int64_t>> raw;
  std::string line;
  std::size_t lineno = 0;
  std::int64_t min_id = std::numeric_limits<std::int64_t>::max();
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (!opts.comment_prefix.empty() && t.rfind(opts.comment_prefix, 0) == 0) continue;
    std::istringstream fields(t);
    std::string a, b, extra;
    if (!(fields >> a >> b) || (fields >> extra)) throw ParseError("expected two vertex ids", lineno);
    std::int64_t u = 0, v = 0;
    try {
      std::size_t used_a = 0, used_b = 0;
      u = std::stoll(a, &used_a);
      v = std::stoll(b, &used_b);
      if (used_a != a.size() || used_b != b.size()) throw ParseError("vertex ids must be integers", lineno);
    } catch (const std::logic_error&) {
      throw ParseError("vertex ids must be integers", lineno);
    }
    if (u < 0 || v < 0) throw ParseError("negative vertex id", lineno);
    if (opts.base == IngestOptions::Base::One && (u == 0 || v == 0)) {
      throw ParseError("vertex id 0 in a one-based file", lineno);
    }
    min_id = std::min({min_id, u, v});
    raw.emplace_back(u, v);
  }

  std::vector<std::int64_t> ids;
  ids.reserve(raw.size() * 2);
  for (const auto& [u, v] : raw) {
    ids.push_back(u);
    ids.push_back(v);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  auto compact = [&](std::int64_t id) {
    return static_cast<Vertex>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };

  std::vector<std::pair<Vertex, Vertex>> edges;
  edges.reserve(raw.size());
  for (const auto& [u, v] : raw) {
    if (u == v) {
      ++out.self_loops_dropped;
      continue;
    }
    const Vertex cu = compact(u), cv = compact(v);
    edges.emplace_back(std::min(cu, cv), std::max(cu, cv));
  }
  std::sort(edges.begin(), edges.end());
  const auto last = std::unique(edges.begin(), edges.end());
  out.duplicate_edges = static_cast<std::size_t>(edges.end() - last);
  edges.erase(last, edges.end());
  if (edges.empty()) throw EmptyGraph("edge list contains no edges");

  out.graph = SparseGraph::from_edges(static_cast<Index>(ids.size()), edges);
  out.original_ids = std::move(ids);
  out.detected_base = min_id == 0 ? 0 : 1;
  return out;
}

IngestResult ingest_edge_list(const std::string& path, const IngestOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open edge list '" + path + "'");
  return ingest_edge_list(in, opts);
}

void write_edge_list(std::ostream& out, const SparseGraph& g) {
  out << "# undirected graph: " << g.n() << " vertices, " << g.m() << " edges\n";
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

// ---------------------------------------------------------------------------
// Sweep configuration

void SweepConfig::validate() const {
  if (!model && edge_list.empty()) throw InvalidArgument("sweep: need a model or an edge list");
  if (tolerances.empty()) throw InvalidArgument("sweep: no tolerances");
  for (std::size_t i = 0; i < tolerances.size(); ++i) {
    if (!(tolerances[i] > 0.0)) throw InvalidArgument("sweep: tolerances must be positive");
    if (i > 0 && !(tolerances[i] < tolerances[i - 1])) {
      throw InvalidArgument("sweep: tolerances must be strictly decreasing");
    }
  }
  if (replicates < 1) throw InvalidArgument("sweep: replicates must be at least 1");
  if (d && *d < 1) throw InvalidArgument("sweep: d must be positive");
  if (threads < 1) throw InvalidArgument("sweep: threads must be at least 1");
  if (block_size < 1) throw InvalidArgument("sweep: block_size must be at least 1");
}

std::vector<double> parse_tolerance_list(const std::string& text) {
  const std::string t = trim(text);
  const auto dots = t.find("..");
  if (dots != std::string::npos) {
    const std::string lo = trim(t.substr(0, dots)), hi = trim(t.substr(dots + 2));
    if (lo.rfind("2^", 0) != 0 || hi.rfind("2^", 0) != 0) {
      throw InvalidArgument("tolerance ranges must look like 2^-1..2^-20");
    }
    return power_of_two_tolerances(-std::stoi(lo.substr(2)), -std::stoi(hi.substr(2)));
  }
  std::vector<double> out;
  std::string s = t;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(parse_tolerance_token(tok));
  return out;
}

SbmSpec parse_sbm_spec(const std::string& b, const std::string& sizes) {
  return SbmSpec(parse_matrix(b), parse_sizes(sizes));
}

namespace {

struct ModelKeys {
  std::string model;
  std::string b;
  std::string sizes;
  Index n = 0;
  double scale = 1.0;
};

void apply_key(SweepConfig& cfg, ModelKeys& mk, const std::string& key, const std::string& value) {
  if (key == "model") mk.model = value;
  else if (key == "B") mk.b = value;
  else if (key == "sizes") mk.sizes = value;
  else if (key == "n") mk.n = std::stoll(value);
  else if (key == "scale") mk.scale = std::stod(value);
  else if (key == "edge_list") cfg.edge_list = value;
  else if (key == "d") cfg.d = value == "auto" ? std::nullopt : std::optional<Index>(std::stoll(value));
  else if (key == "tolerances") cfg.tolerances = parse_tolerance_list(value);
  else if (key == "replicates") cfg.replicates = std::stoi(value);
  else if (key == "seed") cfg.seed = std::stoull(value);
  else if (key == "heuristic_variant" || key == "heuristic") cfg.heuristic = parse_heuristic_variant(value);
  else if (key == "output") cfg.output = value;
  else if (key == "scaled") cfg.scaled = parse_bool(value);
  else if (key == "timing") cfg.timing = parse_bool(value);
  else if (key == "threads") cfg.threads = std::stoi(value);
  else if (key == "dense_oracle_max_n") cfg.dense_oracle_max_n = std::stoll(value);
  else if (key == "max_restarts") cfg.max_restarts = std::stoull(value);
  else if (key == "block_size") cfg.block_size = std::stoll(value);
  else throw InvalidArgument("unknown sweep config key '" + key + "'");
}

void finish_model(SweepConfig& cfg, const ModelKeys& mk) {
  if (mk.model.empty() || mk.model == "edge_list") return;
  if (mk.model == "sbm") {
    if (mk.b.empty() || mk.sizes.empty()) throw InvalidArgument("model=sbm needs B and sizes");
    cfg.model = parse_sbm_spec(mk.b, mk.sizes);
  } else if (mk.model == "figure1") {
    cfg.model = three_block_sbm(mk.n > 0 ? mk.n : 900, mk.scale);
  } else if (mk.model == "figure2") {
    cfg.model = three_block_sbm(mk.n > 0 ? mk.n : 2700, mk.scale);
  } else {
    cfg.edge_list = mk.model;
  }
}

std::string json_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number()) return format_double(v.get<double>());
  if (v.is_array()) {
    std::string out;
    for (const auto& e : v) {
      if (e.is_array()) {
        out += json_scalar(e) + ";";
      } else {
        out += json_scalar(e) + " ";
      }
    }
    return out;
  }
  throw InvalidArgument("unsupported JSON value in sweep config");
}

}  // namespace

SweepConfig parse_sweep_config(const std::string& text) {
  SweepConfig cfg;
  ModelKeys mk;
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(t);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(std::string("sweep config: ") + e.what());
    }
    for (const auto& [key, value] : j.items()) {
      if (key == "model" && value.is_object()) {
        mk.model = "sbm";
        mk.b = json_scalar(value.at("B"));
        mk.sizes = json_scalar(value.at("sizes"));
      } else {
        apply_key(cfg, mk, key, json_scalar(value));
      }
    }
  } else {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string l = trim(line);
      if (l.empty() || l.front() == '#') continue;
      const auto eq = l.find('=');
      if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
      apply_key(cfg, mk, trim(l.substr(0, eq)), trim(l.substr(eq + 1)));
    }
  }
  finish_model(cfg, mk);
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Sweep

Index choose_dimension(const SparseGraph& a, std::uint64_t seed, Index scree_size) {
  const Index k = std::min(scree_size, a.n() - 1);
  if (k < 2) return 1;
  LanczosOptions opts;
  opts.seed = seed;
  const auto dec = truncated_eigs(a, k, 1e-6, opts);
  std::vector<double> scree(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) scree[static_cast<std::size_t>(i)] = std::abs(dec.values(i));
  std::sort(scree.begin(), scree.end(), std::greater<>());
  return zhu_ghodsi_dimension(scree).dimension;
}

namespace {

struct ReplicateOutcome {
  std::vector<SweepRecord> records;
  double lambda1 = 0.0;
  double delta = 0.0;
};

}  // namespace

SweepResult run_tolerance_sweep(const SweepConfig& cfg) {
  cfg.validate();
  std::optional<FactoredProbabilityMatrix> p;
  FactoredProbabilityMatrix::Spectrum truth;
  std::optional<SparseGraph> fixed;
  if (cfg.model) {
    p.emplace(sbm_to_latent(*cfg.model));
    truth = p->spectrum();
  } else {
    fixed = ingest_edge_list(cfg.edge_list).graph;
  }
  auto graph_for = [&](int replicate) {
    return p ? sample_adjacency(*p, derive_seed(cfg.seed, 2 * static_cast<std::uint64_t>(replicate)))
             : *fixed;
  };

  SweepResult result;
  result.heuristic = cfg.heuristic;
  result.d = cfg.d ? *cfg.d : choose_dimension(graph_for(0), derive_seed(cfg.seed, 0x5eedULL));
  const Index d = result.d;
  Matrix v_true, v_scaled;
  result.cp = kNaN;
  if (p) {
    if (d > truth.values.size()) throw InvalidArgument("sweep: d exceeds rank(P)");
    v_true = truth.vectors.leftCols(d);
    v_scaled = v_true * truth.values.head(d).cwiseSqrt().asDiagonal();
    result.cp = sampling_error_constant(*p, d);
  }

  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(cfg.replicates));
  const auto errors = parallel_for(cfg.replicates, cfg.threads, [&](int r) {
    const SparseGraph a = graph_for(r);
    const std::uint64_t solver_seed = derive_seed(cfg.seed, 2 * static_cast<std::uint64_t>(r) + 1);
    ReplicateOutcome& out = outcomes[static_cast<std::size_t>(r)];
    out.lambda1 = estimate_spectral_norm(a, 1e-8, solver_seed);
    out.delta = max_row_sum(a);
    Vector excluded;
    if (a.n() <= cfg.dense_oracle_max_n) excluded = excluded_eigenvalues(dense_eig_oracle(a.dense()).values, d);

    LanczosOptions opts;
    opts.seed = solver_seed;
    opts.max_restarts = cfg.max_restarts;
    opts.block_size = cfg.block_size;
    for (double eps : cfg.tolerances) {
      const auto start = std::chrono::steady_clock::now();
      const auto dec = truncated_eigs(a, d, eps, opts);
      const double elapsed = cfg.timing ? elapsed_ms_since(start) : kNaN;
      SweepRecord rec;
      rec.tolerance = eps;
      rec.tol_exponent = -std::log2(eps);
      rec.replicate = r;
      rec.iterations = dec.iterations;
      rec.matvecs = dec.matvecs;
      rec.residual = dec.residual;
      rec.lambda1 = dec.lambda1_estimate;
      rec.converged = dec.converged;
      rec.elapsed_ms = elapsed;
      rec.procrustes_error = p ? procrustes_distance(dec.vectors, v_true).distance : kNaN;
      rec.scaled_procrustes_error =
          p && cfg.scaled
              ? procrustes_distance(Matrix(dec.vectors * dec.values.cwiseAbs().cwiseSqrt().asDiagonal()), v_scaled)
                    .distance
              : kNaN;
      rec.rho = excluded.size() > 0 ? ritz_gap_rho(dec.values, excluded) : kNaN;
      out.records.push_back(rec);
    }
  });

  for (std::size_t r = 0; r < errors.size(); ++r) {
    if (!errors[r]) continue;
    // Flush the completed prefix so a long sweep keeps its finished replicates.
    if (!cfg.output.empty()) {
      std::vector<SweepRecord> partial;
      for (std::size_t q = 0; q < r; ++q) {
        partial.insert(partial.end(), outcomes[q].records.begin(), outcomes[q].records.end());
      }
      std::ofstream f(cfg.output);
      write_sweep_csv(f, partial, cfg.scaled);
    }
    std::rethrow_exception(errors[r]);
  }

  std::vector<double> lambdas, deltas;
  for (auto& o : outcomes) {
    lambdas.push_back(o.lambda1);
    deltas.push_back(o.delta);
    result.records.insert(result.records.end(), o.records.begin(), o.records.end());
  }
  result.mean_lambda1 = mean_se(lambdas).mean;
  const Index n = p ? p->n() : fixed->n();
  switch (cfg.heuristic) {
    case HeuristicVariant::Spectral: result.heuristic_tolerance = heuristic_tolerance(n, result.mean_lambda1); break;
    case HeuristicVariant::SqrtN: result.heuristic_tolerance = heuristic_tolerance(n, static_cast<double>(n)); break;
    case HeuristicVariant::Conservative: result.heuristic_tolerance = 1.0 / std::sqrt(mean_se(deltas).mean); break;
  }

  const std::size_t nt = cfg.tolerances.size();
  for (std::size_t t = 0; t < nt; ++t) {
    std::vector<double> err, iters, mv, rho, ratio, conv;
    for (const auto& o : outcomes) {
      const SweepRecord& rec = o.records[t];
      err.push_back(rec.procrustes_error);
      iters.push_back(static_cast<double>(rec.iterations));
      mv.push_back(static_cast<double>(rec.matvecs));
      rho.push_back(rec.rho);
      conv.push_back(rec.converged ? 1.0 : 0.0);
      if (std::isfinite(result.cp) && rec.rho > 0.0 && rec.lambda1 > 0.0) {
        ratio.push_back(bound_envelope(result.cp, rec.rho, rec.tolerance, rec.lambda1).ratio);
      }
    }
    SweepSummaryRow row;
    row.tolerance = cfg.tolerances[t];
    row.tol_exponent = -std::log2(row.tolerance);
    const auto e = mean_se(err), it = mean_se(iters);
    row.count = static_cast<int>(outcomes.size());
    row.mean_error = e.mean;
    row.se_error = e.se;
    row.mean_iterations = it.mean;
    row.se_iterations = it.se;
    row.mean_matvecs = mean_se(mv).mean;
    row.mean_rho = mean_se(rho).mean;
    row.mean_bound_ratio = mean_se(ratio).mean;
    row.converged_fraction = mean_se(conv).mean;
    row.at_or_below_heuristic = row.tolerance <= result.heuristic_tolerance;
    result.summary.push_back(row);
  }

  if (!cfg.output.empty()) {
    std::ofstream f(cfg.output);
    if (!f) throw Error("cannot write '" + cfg.output + "'");
    write_sweep_csv(f, result.records, cfg.scaled);
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records, bool scaled) {
  out << "tol_exponent,replicate,iterations,matvecs,procrustes_error,residual,rho,elapsed_ms";
  if (scaled) out << ",scaled_procrustes_error";
  out << '\n';
  for (const auto& r : records) {
    out << format_double(r.tol_exponent) << ',' << r.replicate << ',' << r.iterations << ',' << r.matvecs << ','
        << format_double(r.procrustes_error) << ',' << format_double(r.residual) << ','
        << format_double(r.rho) << ',' << format_double(r.elapsed_ms);
    if (scaled) out << ',' << format_double(r.scaled_procrustes_error);
    out << '\n';
  }
}

std::vector<SweepRecord> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  const std::string base = "tol_exponent,replicate,iterations,matvecs,procrustes_error,residual,rho,elapsed_ms";
  const std::string header = trim(line);
  bool scaled = false;
  if (header == base + ",scaled_procrustes_error") {
    scaled = true;
  } else if (header != base) {
    throw ParseError("unexpected header", 1);
  }
  std::vector<SweepRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(trim(line));
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != (scaled ? 9u : 8u)) throw ParseError("wrong number of columns", lineno);
    SweepRecord r;
    try {
      r.tol_exponent = std::stod(f[0]);
      r.tolerance = std::exp2(-r.tol_exponent);
      r.replicate = std::stoi(f[1]);
      r.iterations = std::stoull(f[2]);
      r.matvecs = std::stoull(f[3]);
      r.procrustes_error = std::strtod(f[4].c_str(), nullptr);
      r.residual = std::strtod(f[5].c_str(), nullptr);
      r.rho = std::strtod(f[6].c_str(), nullptr);
      r.elapsed_ms = std::strtod(f[7].c_str(), nullptr);
      if (scaled) r.scaled_procrustes_error = std::strtod(f[8].c_str(), nullptr);
    } catch (const std::logic_error&) {
      throw ParseError("malformed number", lineno);
    }
    out.push_back(r);
  }
  return out;
}

void write_sweep_summary_csv(std::ostream& out, const SweepResult& result) {
  out << "tol_exponent,tolerance,count,mean_procrustes_error,se_procrustes_error,mean_iterations,"
         "se_iterations,mean_matvecs,mean_rho,mean_bound_ratio,converged_fraction,at_or_below_heuristic\n";
  for (const auto& r : result.summary) {
    out << format_double(r.tol_exponent) << ',' << format_double(r.tolerance) << ',' << r.count << ','
        << format_double(r.mean_error) << ',' << format_double(r.se_error) << ','
        << format_double(r.mean_iterations) << ',' << format_double(r.se_iterations) << ','
        << format_double(r.mean_matvecs) << ',' << format_double(r.mean_rho) << ','
        << format_double(r.mean_bound_ratio) << ',' << format_double(r.converged_fraction) << ','
        << (r.at_or_below_heuristic ? 1 : 0) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Clustering stability

StabilityResult run_clustering_stability(const SparseGraph& graph, const StabilityConfig& cfg) {
  if (cfg.tolerances.empty()) throw InvalidArgument("cluster-stability: no tolerances");
  if (cfg.repetitions < 1) throw InvalidArgument("cluster-stability: repetitions must be at least 1");
  if (!(cfg.reference_tol > 0.0)) throw InvalidArgument("cluster-stability: reference tolerance must be positive");
  std::vector<int> ks;
  for (int k : cfg.k_range) {
    if (k >= 2 && k <= graph.n() - 1) ks.push_back(k);
  }
  if (ks.empty()) throw EmptyRange("cluster-stability: no admissible k");

  StabilityResult result;
  result.d = cfg.d ? *cfg.d : choose_dimension(graph, derive_seed(cfg.seed, 0x5eedULL));
  const double lambda1 = estimate_spectral_norm(graph, 1e-8, cfg.seed);
  switch (cfg.heuristic) {
    case HeuristicVariant::Spectral: result.heuristic_tolerance = heuristic_tolerance(graph.n(), lambda1); break;
    case HeuristicVariant::SqrtN:
      result.heuristic_tolerance = heuristic_tolerance(graph.n(), static_cast<double>(graph.n()));
      break;
    case HeuristicVariant::Conservative: result.heuristic_tolerance = conservative_tolerance(graph); break;
  }

  const std::size_t nt = cfg.tolerances.size();
  const auto reps = static_cast<std::size_t>(cfg.repetitions);
  result.ari_reference.assign(reps, std::vector<double>(nt, kNaN));
  result.ari_consecutive.assign(reps, std::vector<double>(nt, kNaN));
  std::vector<std::vector<double>> chosen_k(reps, std::vector<double>(nt, kNaN));
  std::vector<std::vector<double>> iterations(reps, std::vector<double>(nt, kNaN));
  std::vector<double> reference_k(reps, kNaN);

  const auto errors = parallel_for(cfg.repetitions, cfg.threads, [&](int rep) {
    const auto r = static_cast<std::size_t>(rep);
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
    LanczosOptions opts;
    opts.seed = seed;
    opts.max_restarts = cfg.max_restarts;
    const auto ref = truncated_eigs(graph, result.d, cfg.reference_tol, opts);
    const auto ref_sel = choose_k_by_silhouette(ref.vectors, ks, seed);
    reference_k[r] = ref_sel.k;
    std::vector<int> previous;
    for (std::size_t t = 0; t < nt; ++t) {
      const auto dec = truncated_eigs(graph, result.d, cfg.tolerances[t], opts);
      const auto sel = choose_k_by_silhouette(dec.vectors, ks, seed);
      result.ari_reference[r][t] = adjusted_rand_index(sel.clustering.labels, ref_sel.clustering.labels);
      if (!previous.empty()) result.ari_consecutive[r][t] = adjusted_rand_index(sel.clustering.labels, previous);
      chosen_k[r][t] = sel.k;
      iterations[r][t] = static_cast<double>(dec.iterations);
      previous = sel.clustering.labels;
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  result.reference_mean_k = mean_se(reference_k).mean;
  for (std::size_t t = 0; t < nt; ++t) {
    std::vector<double> ref, cons, k, it;
    for (std::size_t r = 0; r < reps; ++r) {
      ref.push_back(result.ari_reference[r][t]);
      cons.push_back(result.ari_consecutive[r][t]);
      k.push_back(chosen_k[r][t]);
      it.push_back(iterations[r][t]);
    }
    StabilityRow row;
    row.tolerance = cfg.tolerances[t];
    row.tol_exponent = -std::log2(row.tolerance);
    const auto a = mean_se(ref), c = mean_se(cons);
    row.mean_ari_reference = a.mean;
    row.se_ari_reference = a.se;
    row.mean_ari_consecutive = c.mean;
    row.se_ari_consecutive = c.se;
    row.mean_k = mean_se(k).mean;
    row.mean_iterations = mean_se(it).mean;
    result.rows.push_back(row);
  }
  return result;
}

void write_stability_csv(std::ostream& out, const StabilityResult& result) {
  out << "tol_exponent,tolerance,mean_ari_reference,se_ari_reference,mean_ari_consecutive,"
         "se_ari_consecutive,mean_k,mean_iterations\n";
  for (const auto& r : result.rows) {
    out << format_double(r.tol_exponent) << ',' << format_double(r.tolerance) << ','
        << format_double(r.mean_ari_reference) << ',' << format_double(r.se_ari_reference) << ','
        << format_double(r.mean_ari_consecutive) << ',' << format_double(r.se_ari_consecutive) << ','
        << format_double(r.mean_k) << ',' << format_double(r.mean_iterations) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Check

CheckReport run_check(const SparseGraph& a, const FactoredProbabilityMatrix* p, Index d, double c0,
                      double a_exponent, std::uint64_t seed) {
  CheckReport r;
  r.n = a.n();
  r.m = a.m();
  r.delta_a = max_row_sum(a);
  r.conservative = conservative_tolerance(a);
  r.lambda1_hat = estimate_spectral_norm(a, 1e-8, seed);
  r.heuristic_spectral = a.n() >= 16 ? heuristic_tolerance(a.n(), r.lambda1_hat) : kNaN;
  r.heuristic_sqrt_n = a.n() >= 16 ? heuristic_tolerance(a.n(), static_cast<double>(a.n())) : kNaN;
  if (p != nullptr) {
    const auto rep = check_assumptions(*p, d, c0, a_exponent);
    r.gamma = rep.gamma;
    r.rank_check = rep.rank_check;
    r.gamma_check = rep.gamma_check;
    r.delta_check = rep.delta_check;
  } else {
    r.gamma = eigengap_ratio(a, d, seed);
    r.gamma_check = r.gamma > c0;
    r.delta_check = r.delta_a > std::pow(std::log(static_cast<double>(a.n())), 4.0 + a_exponent);
  }
  return r;
}

}  // namespace spectol
