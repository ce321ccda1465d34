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

// Truncated symmetric eigendecomposition of adjacency matrices by thick
// restarted (block) Lanczos, stopped on the relative residual
//
//     ||A U - U S||_2 / lambda_1  <=  eps,
//
// plus a dense eigensolver used as a test oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "spectol/errors.hpp"
#include "spectol/graph_model.hpp"

namespace spectol {

/// out = A v. `out` must not alias `v`.
void matvec(const SparseGraph& a, const Eigen::Ref<const Vector>& v, Eigen::Ref<Vector> out);
Vector matvec(const SparseGraph& a, const Eigen::Ref<const Vector>& v);
/// A V for a block of column vectors.
Matrix matvec_block(const SparseGraph& a, const Eigen::Ref<const Matrix>& v);

struct LanczosOptions {
  std::size_t max_restarts = 2000;
  Index block_size = 1;
  /// Working basis size before a restart; 0 selects max(2d + 5, 20).
  Index krylov_dim = 0;
  std::uint64_t seed = 0;
};

struct SpectralDecomposition {
  Index d = 0;
  Vector values;   // Ritz values by decreasing magnitude
  Matrix vectors;  // n x d, orthonormal columns
  double residual = 0.0;         // ||A U - U S||_2, evaluated exactly
  double lambda1_estimate = 0.0; // largest Ritz magnitude at termination
  std::size_t iterations = 0;    // restart cycles
  std::size_t matvecs = 0;       // A v products spent building Krylov bases
  std::size_t check_matvecs = 0; // A v products spent verifying candidates
  bool converged = false;
  double tolerance_used = 0.0;
  Index krylov_dim = 0;

  double relative_residual() const {
    return lambda1_estimate > 0.0 ? residual / lambda1_estimate : residual;
  }
};

/// Top-d eigenpairs by magnitude. Stops at the first restart whose exact
/// relative residual is at most `eps`. If `max_restarts` runs out the best
/// iterate seen is returned with `converged == false`.
SpectralDecomposition truncated_eigs(const SparseGraph& a, Index d, double eps,
                                     const LanczosOptions& opts = {});

/// Largest-magnitude eigenvalue (the spectral norm for adjacency matrices).
/// Throws NoConvergence if the relative residual `tol` is not reached.
double estimate_spectral_norm(const SparseGraph& a, double tol = 1e-10, std::uint64_t seed = 0,
                              std::size_t max_restarts = 2000);

/// G = A U - U diag(s).
Matrix residual_matrix(const SparseGraph& a, const Eigen::Ref<const Matrix>& u,
                       const Eigen::Ref<const Vector>& s);
/// ||A U - U diag(s)||_2 through the d x d Gram matrix of the residual.
double residual_norm(const SparseGraph& a, const Eigen::Ref<const Matrix>& u,
                     const Eigen::Ref<const Vector>& s);

/// Spectral norm of a thin matrix from its Gram matrix.
template <typename Derived>
typename Derived::Scalar thin_spectral_norm(const Eigen::MatrixBase<Derived>& g) {
  using Scalar = typename Derived::Scalar;
  if (g.cols() == 0 || g.rows() == 0) return Scalar(0);
  using Small = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Small gram = g.transpose() * g;
  Eigen::SelfAdjointEigenSolver<Small> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(Scalar(0), es.eigenvalues().maxCoeff()));
}

template <typename Scalar>
struct DenseEigen {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;  // by decreasing magnitude
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;
};

inline constexpr Index kDenseOracleMaxN = 5000;

/// Orders indices by decreasing |value|; ties put the positive value first.
template <typename Derived>
std::vector<Index> order_by_magnitude(const Eigen::DenseBase<Derived>& values) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const auto ma = std::abs(values(a));
    const auto mb = std::abs(values(b));
    if (ma != mb) return ma > mb;
    return values(a) > values(b);
  });
  // A +/- pair equal in magnitude up to rounding counts as a tie: positive first.
  const auto tol = values.size() > 0 ? 1e-12 * values.derived().array().abs().maxCoeff() : 0;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const auto a = values(order[i]), b = values(order[i + 1]);
    if (a < 0 && b > 0 && std::abs(std::abs(a) - std::abs(b)) <= tol) std::swap(order[i], order[i + 1]);
  }
  return order;
}

/// Full eigendecomposition of a small dense symmetric matrix.
template <typename Derived>
DenseEigen<typename Derived::Scalar> dense_eig_oracle(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (m.rows() != m.cols()) throw DimensionMismatch("dense_eig_oracle: matrix is not square");
  if (m.rows() > kDenseOracleMaxN) throw TooLarge("dense_eig_oracle: n exceeds 5000");
  const Mat mat = m;
  const Scalar scale = std::max(Scalar(1), mat.cwiseAbs().maxCoeff());
  if ((mat - mat.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale) {
    throw NotSymmetric("dense_eig_oracle: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(mat);
  if (es.info() != Eigen::Success) throw Error("dense_eig_oracle: eigensolver failed");
  const auto order = order_by_magnitude(es.eigenvalues());
  DenseEigen<Scalar> out;
  out.values.resize(mat.rows());
  out.vectors.resize(mat.rows(), mat.rows());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.values(static_cast<Index>(i)) = es.eigenvalues()(order[i]);
    out.vectors.col(static_cast<Index>(i)) = es.eigenvectors().col(order[i]);
  }
  return out;
}

/// The n - d eigenvalues left after removing the d largest in magnitude.
/// `all` must already be ordered by decreasing magnitude.
Vector excluded_eigenvalues(const Eigen::Ref<const Vector>& all, Index d);

/// Minimum distance between any Ritz value and any excluded eigenvalue.
double ritz_gap_rho(const Eigen::Ref<const Vector>& ritz_values,
                    const Eigen::Ref<const Vector>& excluded);

}  // namespace spectol
