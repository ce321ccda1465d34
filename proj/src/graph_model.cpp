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

#include "spectol/graph_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "spectol/spectral.hpp"

namespace spectol {

LatentPositions::LatentPositions(Matrix rows, double slack) : rows_(std::move(rows)) {
  if (rows_.rows() < 1 || rows_.cols() < 1) {
    throw InvalidArgument("LatentPositions: need n >= 1 and d >= 1");
  }
  if (rows_.cols() > rows_.rows()) throw InvalidArgument("LatentPositions: d exceeds n");
  if (!rows_.allFinite()) throw InvalidArgument("LatentPositions: non-finite entry");
  // Blockwise so the check never materializes the full n x n product.
  constexpr Index kBlock = 512;
  for (Index start = 0; start < n(); start += kBlock) {
    const Index len = std::min(kBlock, n() - start);
    const Matrix dots = rows_.middleRows(start, len) * rows_.transpose();
    if (dots.minCoeff() < -slack || dots.maxCoeff() > 1.0 + slack) {
      throw InvalidArgument("LatentPositions: a dot product falls outside [0, 1]");
    }
  }
}

SbmSpec::SbmSpec(Matrix block_probabilities, std::vector<Index> sizes)
    : b_(std::move(block_probabilities)), sizes_(std::move(sizes)) {
  if (b_.rows() != b_.cols() || b_.rows() == 0) {
    throw InvalidArgument("SbmSpec: B must be a nonempty square matrix");
  }
  if (static_cast<Index>(sizes_.size()) != b_.rows()) {
    throw DimensionMismatch("SbmSpec: need one block size per row of B");
  }
  // Rounding-level asymmetry (e.g. B built as W W^T) is symmetrized away.
  if ((b_ - b_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidArgument("SbmSpec: B must be symmetric");
  }
  b_ = (0.5 * (b_ + b_.transpose())).eval();
  if (b_.minCoeff() < 0.0 || b_.maxCoeff() > 1.0) {
    throw InvalidArgument("SbmSpec: B entries must lie in [0, 1]");
  }
  for (Index s : sizes_) {
    if (s < 1) throw InvalidArgument("SbmSpec: block sizes must be positive");
    n_ += s;
  }
}

std::vector<int> SbmSpec::labels() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n_));
  for (std::size_t b = 0; b < sizes_.size(); ++b) {
    out.insert(out.end(), static_cast<std::size_t>(sizes_[b]), static_cast<int>(b));
  }
  return out;
}

Matrix SbmSpec::indicator() const {
  Matrix z = Matrix::Zero(n_, k());
  const auto lab = labels();
  for (Index i = 0; i < n_; ++i) z(i, lab[static_cast<std::size_t>(i)]) = 1.0;
  return z;
}

SbmSpec SbmSpec::scaled(double factor) const { return SbmSpec(b_ * factor, sizes_); }

Vector FactoredProbabilityMatrix::row_sums() const {
  const Vector total = X().colwise().sum().transpose();
  return X() * total;
}

FactoredProbabilityMatrix::Spectrum FactoredProbabilityMatrix::spectrum(double rel_cutoff) const {
  // P = X X^T and X^T X share nonzero eigenvalues; V = X W diag(lambda)^(-1/2).
  const Matrix gram = X().transpose() * X();
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const Vector& lam = es.eigenvalues();  // ascending
  const double top = lam.size() > 0 ? lam(lam.size() - 1) : 0.0;
  Spectrum out;
  std::vector<Index> keep;
  for (Index i = lam.size() - 1; i >= 0; --i) {
    if (top > 0.0 && lam(i) > rel_cutoff * top) keep.push_back(i);
  }
  out.values.resize(static_cast<Index>(keep.size()));
  out.vectors.resize(n(), static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const Index i = keep[c];
    const auto col = static_cast<Index>(c);
    out.values(col) = lam(i);
    out.vectors.col(col) = X() * es.eigenvectors().col(i) / std::sqrt(lam(i));
  }
  return out;
}

SparseGraph SparseGraph::from_edges(Index n, std::span<const std::pair<Vertex, Vertex>> edges) {
  if (n < 0) throw InvalidArgument("SparseGraph: negative vertex count");
  if (n > std::numeric_limits<Vertex>::max()) throw TooLarge("SparseGraph: too many vertices");
  std::vector<Index> degree(static_cast<std::size_t>(n), 0);
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw InvalidArgument("SparseGraph: edge endpoint out of range");
    }
    if (u == v) throw InvalidArgument("SparseGraph: self-loop at vertex " + std::to_string(u));
    ++degree[static_cast<std::size_t>(u)];
    ++degree[static_cast<std::size_t>(v)];
  }
  SparseGraph g;
  g.n_ = n;
  g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (Index i = 0; i < n; ++i) {
    g.offsets_[static_cast<std::size_t>(i) + 1] = g.offsets_[static_cast<std::size_t>(i)] + degree[static_cast<std::size_t>(i)];
  }
  std::vector<Vertex> raw(static_cast<std::size_t>(g.offsets_.back()));
  std::vector<Index> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& [u, v] : edges) {
    raw[static_cast<std::size_t>(fill[static_cast<std::size_t>(u)]++)] = v;
    raw[static_cast<std::size_t>(fill[static_cast<std::size_t>(v)]++)] = u;
  }
  // Sort and deduplicate each list, then compact.
  std::vector<Index> offsets(static_cast<std::size_t>(n) + 1, 0);
  std::size_t out = 0;
  for (Index i = 0; i < n; ++i) {
    const auto begin = raw.begin() + g.offsets_[static_cast<std::size_t>(i)];
    const auto end = raw.begin() + g.offsets_[static_cast<std::size_t>(i) + 1];
    std::sort(begin, end);
    const auto last = std::unique(begin, end);
    for (auto it = begin; it != last; ++it) raw[out++] = *it;
    offsets[static_cast<std::size_t>(i) + 1] = static_cast<Index>(out);
  }
  raw.resize(out);
  g.offsets_ = std::move(offsets);
  g.indices_ = std::move(raw);
  g.validate();
  return g;
}

SparseGraph SparseGraph::from_dense(const Matrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) throw DimensionMismatch("from_dense: not square");
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (Index i = 0; i < adjacency.rows(); ++i) {
    if (adjacency(i, i) != 0.0) throw InvalidArgument("from_dense: nonzero diagonal");
    for (Index j = i + 1; j < adjacency.cols(); ++j) {
      if (adjacency(i, j) != adjacency(j, i)) throw NotSymmetric("from_dense: not symmetric");
      if (adjacency(i, j) != 0.0 && adjacency(i, j) != 1.0) {
        throw InvalidArgument("from_dense: entries must be 0 or 1");
      }
      if (adjacency(i, j) == 1.0) edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(j));
    }
  }
  return from_edges(adjacency.rows(), edges);
}

bool SparseGraph::has_edge(Index i, Index j) const {
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), static_cast<Vertex>(j));
}

std::vector<std::pair<Vertex, Vertex>> SparseGraph::edges() const {
  std::vector<std::pair<Vertex, Vertex>> out;
  out.reserve(static_cast<std::size_t>(m()));
  for (Index i = 0; i < n_; ++i) {
    for (Vertex j : neighbors(i)) {
      if (j > i) out.emplace_back(static_cast<Vertex>(i), j);
    }
  }
  return out;
}

Matrix SparseGraph::dense() const {
  Matrix out = Matrix::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i) {
    for (Vertex j : neighbors(i)) out(i, j) = 1.0;
  }
  return out;
}

void SparseGraph::validate() const {
  for (Index i = 0; i < n_; ++i) {
    const auto nb = neighbors(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (k > 0 && nb[k - 1] >= nb[k]) throw Error("SparseGraph: neighbor list not strictly sorted");
      if (nb[k] == i) throw Error("SparseGraph: self-loop");
      if (!has_edge(nb[k], i)) throw Error("SparseGraph: adjacency is not symmetric");
    }
  }
}

LatentPositions sbm_to_latent(const SbmSpec& spec) {
  constexpr double kPsdTol = 1e-10;
  Eigen::SelfAdjointEigenSolver<Matrix> es(spec.B());
  const Vector& lam = es.eigenvalues();  // ascending
  if (lam.minCoeff() < -kPsdTol) {
    throw NotPositiveSemidefinite("sbm_to_latent: B has eigenvalue " + std::to_string(lam.minCoeff()) +
                                  "; this block model is not a random dot product graph");
  }
  std::vector<Index> positive;
  for (Index i = lam.size() - 1; i >= 0; --i) {
    if (lam(i) > 0.0) positive.push_back(i);
  }
  const Index d = std::max<Index>(1, static_cast<Index>(positive.size()));
  Matrix block_rows = Matrix::Zero(spec.k(), d);
  for (std::size_t c = 0; c < positive.size(); ++c) {
    const Index i = positive[c];
    block_rows.col(static_cast<Index>(c)) = es.eigenvectors().col(i) * std::sqrt(lam(i));
  }
  Matrix x(spec.n(), d);
  Index row = 0;
  for (Index b = 0; b < spec.k(); ++b) {
    for (Index r = 0; r < spec.sizes()[static_cast<std::size_t>(b)]; ++r) x.row(row++) = block_rows.row(b);
  }
  return LatentPositions(std::move(x), 1e-9);
}

SparseGraph sample_adjacency(const FactoredProbabilityMatrix& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Matrix& x = p.X();
  const Index n = p.n();
  std::vector<std::pair<Vertex, Vertex>> edges;
  Vector probs;
  for (Index i = 0; i + 1 < n; ++i) {
    probs.noalias() = x.bottomRows(n - i - 1) * x.row(i).transpose();
    for (Index k = 0; k < probs.size(); ++k) {
      const double pij = std::clamp(probs(k), 0.0, 1.0);
      if (unif(rng) < pij) edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(i + 1 + k));
    }
  }
  return SparseGraph::from_edges(n, edges);
}

double max_row_sum(const SparseGraph& a) {
  Index best = 0;
  for (Index i = 0; i < a.n(); ++i) best = std::max(best, a.degree(i));
  return static_cast<double>(best);
}

double max_row_sum(const FactoredProbabilityMatrix& p) {
  if (p.n() == 0) return 0.0;
  return p.row_sums().maxCoeff();
}

namespace {

double gap_over_delta(const Vector& by_magnitude, Index d, double delta) {
  if (!(delta > 0.0)) throw DegenerateDelta("eigengap_ratio: delta(M) is zero");
  const double lower = d < by_magnitude.size() ? by_magnitude(d) : 0.0;
  return (by_magnitude(d - 1) - lower) / delta;
}

void check_dimension(Index d, Index n) {
  if (d < 1 || d >= n) throw InvalidArgument("eigengap_ratio: need 1 <= d < n");
}

}  // namespace

double eigengap_ratio(const FactoredProbabilityMatrix& p, Index d) {
  check_dimension(d, p.n());
  // P is PSD, so its magnitude order is the algebraic order; beyond rank(P)
  // every eigenvalue is zero.
  const auto spec = p.spectrum();
  Vector lam = Vector::Zero(std::max<Index>(d + 1, spec.values.size()));
  lam.head(spec.values.size()) = spec.values;
  return gap_over_delta(lam, d, max_row_sum(p));
}

double eigengap_ratio(const Matrix& m, Index d) {
  check_dimension(d, m.rows());
  const double delta = max_row_sum(m);
  if (!(delta > 0.0)) throw DegenerateDelta("eigengap_ratio: delta(M) is zero");
  return gap_over_delta(dense_eig_oracle(m).values, d, delta);
}

double eigengap_ratio(const SparseGraph& a, Index d, std::uint64_t seed) {
  check_dimension(d, a.n());
  const double delta = max_row_sum(a);
  if (!(delta > 0.0)) throw DegenerateDelta("eigengap_ratio: delta(M) is zero");
  const Index want = std::min(d + 1, a.n() - 1);
  LanczosOptions opts;
  opts.seed = seed;
  const auto dec = truncated_eigs(a, want, 1e-10, opts);
  if (!dec.converged) throw NoConvergence("eigengap_ratio: Lanczos did not converge", opts.max_restarts);
  Vector lam = Vector::Zero(d + 1);
  lam.head(dec.values.size()) = dec.values;
  return gap_over_delta(lam, d, delta);
}

AssumptionReport check_assumptions(const FactoredProbabilityMatrix& p, Index d, double c0, double a) {
  AssumptionReport r;
  r.n = p.n();
  r.d = d;
  r.delta = max_row_sum(p);
  r.delta_threshold = std::pow(std::log(static_cast<double>(p.n())), 4.0 + a);
  const auto spec = p.spectrum(1e-8);
  r.rank = spec.values.size();
  r.lambda1 = r.rank > 0 ? spec.values(0) : 0.0;
  r.rank_check = r.rank == d;
  if (r.delta > 0.0 && d >= 1 && d < p.n()) {
    Vector lam = Vector::Zero(std::max<Index>(d + 1, r.rank));
    lam.head(r.rank) = spec.values;
    r.gamma = (lam(d - 1) - lam(d)) / r.delta;
  } else {
    r.gamma = std::numeric_limits<double>::quiet_NaN();
  }
  r.gamma_check = r.gamma > c0;
  r.delta_check = r.delta > r.delta_threshold;
  return r;
}

}  // namespace spectol
