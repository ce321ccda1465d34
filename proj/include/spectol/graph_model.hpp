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

// Random dot product graph models, their probability matrices in factored
// form, and hollow symmetric adjacency samples.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spectol/errors.hpp"

namespace spectol {

using Index = Eigen::Index;
using Vertex = std::int32_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// n x d latent positions; every pairwise dot product (including X_i . X_i)
/// lies in [0, 1] up to a small absolute slack.
class LatentPositions {
 public:
  explicit LatentPositions(Matrix rows, double slack = 1e-12);

  Index n() const { return rows_.rows(); }
  Index d() const { return rows_.cols(); }
  const Matrix& rows() const { return rows_; }

 private:
  Matrix rows_;
};

/// Stochastic block model with consecutive block assignment: block b owns
/// the index range [offset(b), offset(b) + sizes[b]).
class SbmSpec {
 public:
  SbmSpec(Matrix block_probabilities, std::vector<Index> sizes);

  Index k() const { return b_.rows(); }
  Index n() const { return n_; }
  const Matrix& B() const { return b_; }
  const std::vector<Index>& sizes() const { return sizes_; }

  /// Block label of every vertex (the assignment vector tau).
  std::vector<int> labels() const;
  /// n x k block indicator matrix Z.
  Matrix indicator() const;
  /// Same block sizes, every probability multiplied by `factor`.
  SbmSpec scaled(double factor) const;

 private:
  Matrix b_;
  std::vector<Index> sizes_;
  Index n_ = 0;
};

/// P = X X^T, kept as its factor X.
class FactoredProbabilityMatrix {
 public:
  explicit FactoredProbabilityMatrix(LatentPositions latent)
      : latent_(std::move(latent)) {}

  Index n() const { return latent_.n(); }
  Index d() const { return latent_.d(); }
  const LatentPositions& latent() const { return latent_; }
  const Matrix& X() const { return latent_.rows(); }

  double entry(Index i, Index j) const { return X().row(i).dot(X().row(j)); }
  /// Dense n x n P. Intended for verification at small n.
  Matrix dense() const { return X() * X().transpose(); }
  /// Row sums of P including the diagonal, in O(nd).
  Vector row_sums() const;

  struct Spectrum {
    Vector values;   // nonzero eigenvalues, decreasing
    Matrix vectors;  // n x values.size(), orthonormal columns
  };
  /// Eigenpairs of P from the d x d Gram matrix X^T X. Eigenvalues at or
  /// below `rel_cutoff * lambda_1` are dropped.
  Spectrum spectrum(double rel_cutoff = 1e-12) const;

 private:
  LatentPositions latent_;
};

/// Immutable hollow undirected graph stored as sorted adjacency lists (CSR).
class SparseGraph {
 public:
  SparseGraph() = default;

  /// Builds from an undirected edge list. Edges may appear in either
  /// orientation and repeat; self-loops and out-of-range endpoints throw.
  static SparseGraph from_edges(Index n, std::span<const std::pair<Vertex, Vertex>> edges);
  /// Builds from a dense symmetric 0/1 matrix with zero diagonal.
  static SparseGraph from_dense(const Matrix& adjacency);

  Index n() const { return n_; }
  Index m() const { return static_cast<Index>(indices_.size()) / 2; }
  Index degree(Index i) const { return offsets_[i + 1] - offsets_[i]; }
  std::span<const Vertex> neighbors(Index i) const {
    return {indices_.data() + offsets_[i], static_cast<std::size_t>(degree(i))};
  }
  bool has_edge(Index i, Index j) const;

  /// Each undirected edge once, as (i, j) with i < j, in lexicographic order.
  std::vector<std::pair<Vertex, Vertex>> edges() const;
  Matrix dense() const;

  friend bool operator==(const SparseGraph& a, const SparseGraph& b) {
    return a.offsets_ == b.offsets_ && a.indices_ == b.indices_;
  }

 private:
  void validate() const;

  Index n_ = 0;
  std::vector<Index> offsets_{0};
  std::vector<Vertex> indices_;
};

/// Latent positions reproducing Z B Z^T. B eigenvalues in [-1e-10, 0) are
/// clamped to zero; anything more negative throws NotPositiveSemidefinite.
LatentPositions sbm_to_latent(const SbmSpec& spec);

/// Independent Bernoulli(X_i . X_j) edges for i < j. No self-loops.
SparseGraph sample_adjacency(const FactoredProbabilityMatrix& p, std::uint64_t seed);

double max_row_sum(const SparseGraph& a);
double max_row_sum(const FactoredProbabilityMatrix& p);
template <typename Derived>
double max_row_sum(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() == 0) return 0.0;
  return static_cast<double>(m.rowwise().sum().maxCoeff());
}

/// (lambda_d - lambda_{d+1}) / delta(M), eigenvalues ordered by decreasing
/// magnitude. Throws DegenerateDelta when delta(M) == 0.
double eigengap_ratio(const FactoredProbabilityMatrix& p, Index d);
double eigengap_ratio(const Matrix& m, Index d);
double eigengap_ratio(const SparseGraph& a, Index d, std::uint64_t seed = 0);

struct AssumptionReport {
  Index n = 0;
  Index d = 0;
  Index rank = 0;
  double lambda1 = 0.0;
  double gamma = 0.0;  // NaN when delta is zero
  double delta = 0.0;
  double delta_threshold = 0.0;  // (ln n)^(4 + a)
  bool rank_check = false;       // rank == d
  bool gamma_check = false;      // gamma > c0
  bool delta_check = false;      // delta > (ln n)^(4 + a)
};

/// Evaluates the eigengap and degree conditions on P. Never throws for
/// degenerate P; the failing checks are reported instead.
AssumptionReport check_assumptions(const FactoredProbabilityMatrix& p, Index d, double c0, double a);

}  // namespace spectol
