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

#include "spectol/spectral.hpp"

#include <limits>
#include <random>

namespace spectol {

void matvec(const SparseGraph& a, const Eigen::Ref<const Vector>& v, Eigen::Ref<Vector> out) {
  if (v.size() != a.n() || out.size() != a.n()) {
    throw DimensionMismatch("matvec: vector length does not match vertex count");
  }
  for (Index i = 0; i < a.n(); ++i) {
    double acc = 0.0;
    for (Vertex j : a.neighbors(i)) acc += v(j);
    out(i) = acc;
  }
}

Vector matvec(const SparseGraph& a, const Eigen::Ref<const Vector>& v) {
  Vector out(a.n());
  matvec(a, v, out);
  return out;
}

Matrix matvec_block(const SparseGraph& a, const Eigen::Ref<const Matrix>& v) {
  if (v.rows() != a.n()) throw DimensionMismatch("matvec: block row count does not match vertex count");
  Matrix out = Matrix::Zero(a.n(), v.cols());
  for (Index i = 0; i < a.n(); ++i) {
    for (Vertex j : a.neighbors(i)) out.row(i) += v.row(j);
  }
  return out;
}

namespace {

// Columns of `w` are made orthonormal to `basis` and to each other (two
// Gram-Schmidt passes each). Returns the b x b upper triangular R with
// w_in = basis * (...) + Q R. A column that vanishes under projection gets a
// zero row in R and is replaced by a fresh random direction; if the whole
// space is exhausted the column is left at zero.
Matrix orthonormalize_block(Eigen::Ref<Matrix> w, const Eigen::Ref<const Matrix>& basis,
                            std::mt19937_64& rng) {
  constexpr double kBreakdown = 1e-12;
  const Index b = w.cols();
  Matrix r = Matrix::Zero(b, b);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  auto project_out = [&](Eigen::Ref<Vector> x, Index upto, Vector* coeffs) {
    for (int pass = 0; pass < 2; ++pass) {
      if (basis.cols() > 0) {
        const Vector h = basis.transpose() * x;
        x.noalias() -= basis * h;
      }
      for (Index c = 0; c < upto; ++c) {
        const double h = w.col(c).dot(x);
        x -= h * w.col(c);
        if (coeffs != nullptr) (*coeffs)(c) += h;
      }
    }
  };

  for (Index c = 0; c < b; ++c) {
    const double before = w.col(c).norm();
    Vector coeffs = Vector::Zero(b);
    Vector x = w.col(c);
    project_out(x, c, &coeffs);
    const double after = x.norm();
    r.col(c).head(c) = coeffs.head(c);
    if (after > kBreakdown * before && after > 0.0) {
      r(c, c) = after;
      w.col(c) = x / after;
      continue;
    }
    // Invariant subspace reached: restart this column from a random vector.
    x = Vector::NullaryExpr(w.rows(), [&]() { return unif(rng); });
    const double fresh = x.norm();
    project_out(x, c, nullptr);
    const double left = x.norm();
    if (left > 1e-8 * fresh) {
      w.col(c) = x / left;
    } else {
      w.col(c).setZero();
    }
  }
  return r;
}

struct IterateSnapshot {
  double estimate = std::numeric_limits<double>::infinity();
  double lambda1 = 0.0;
  Vector values;
  Matrix vectors;
  std::size_t iteration = 0;
};

}  // namespace

SpectralDecomposition truncated_eigs(const SparseGraph& a, Index d, double eps,
                                     const LanczosOptions& opts) {
  const Index n = a.n();
  if (d < 1 || d >= n) throw InvalidArgument("truncated_eigs: need 1 <= d < n");
  if (!(eps > 0.0)) throw InvalidArgument("truncated_eigs: tolerance must be positive");
  if (a.m() == 0) throw DegenerateGraph("truncated_eigs: adjacency matrix is zero");
  const Index b = opts.block_size;
  if (b < 1) throw InvalidArgument("truncated_eigs: block size must be positive");
  if (opts.max_restarts == 0) throw InvalidArgument("truncated_eigs: max_restarts must be positive");

  Index m = opts.krylov_dim > 0 ? opts.krylov_dim : std::max<Index>(2 * d + 5, 20);
  m = b * ((m + b - 1) / b);
  if (m > n) m = b * (n / b);
  if (m < d + b) {
    throw InvalidArgument("truncated_eigs: Krylov dimension too small for d and block size");
  }
  Index keep = std::clamp<Index>(d + (m - d) / 2, d, m - b);
  keep = m - b * ((m - keep) / b);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  // Columns [0, j) hold the basis, [j, j + b) the current residual block.
  Matrix v = Matrix::Zero(n, m + b);
  Matrix t = Matrix::Zero(m, m);
  Matrix coupling = Matrix::Zero(b, m);
  Index j = 0;
  {
    Matrix start = Matrix::NullaryExpr(n, b, [&]() { return unif(rng); });
    orthonormalize_block(start, v.leftCols(0), rng);
    v.middleCols(0, b) = start;
  }

  SpectralDecomposition out;
  out.d = d;
  out.tolerance_used = eps;
  out.krylov_dim = m;
  IterateSnapshot best;

  Matrix w(n, b);
  while (true) {
    while (j < m) {
      t.block(j, 0, b, j) = coupling.leftCols(j);
      t.block(0, j, j, b) = coupling.leftCols(j).transpose();
      w = matvec_block(a, v.middleCols(j, b));
      out.matvecs += static_cast<std::size_t>(b);
      const Index jn = j + b;
      Matrix h = v.leftCols(jn).transpose() * w;
      w.noalias() -= v.leftCols(jn) * h;
      const Matrix h2 = v.leftCols(jn).transpose() * w;
      w.noalias() -= v.leftCols(jn) * h2;
      h += h2;
      const Matrix diag = h.bottomRows(b);
      t.block(j, j, b, b) = 0.5 * (diag + diag.transpose());
      const Matrix r = orthonormalize_block(w, v.leftCols(jn), rng);
      v.middleCols(jn, b) = w;
      coupling.setZero();
      coupling.block(0, j, b, b) = r;
      j = jn;
    }

    ++out.iterations;
    Eigen::SelfAdjointEigenSolver<Matrix> es(t);
    const Vector& theta = es.eigenvalues();
    const auto order = order_by_magnitude(theta);
    Matrix yd(m, d);
    Vector sd(d);
    for (Index c = 0; c < d; ++c) {
      yd.col(c) = es.eigenvectors().col(order[static_cast<std::size_t>(c)]);
      sd(c) = theta(order[static_cast<std::size_t>(c)]);
    }
    const double lambda1 = std::abs(theta(order[0]));
    // A V Y = V Y Theta + V_res (C Y): the residual of the Ritz block is C Y.
    const double estimate = thin_spectral_norm(coupling * yd);

    const bool candidate = estimate <= eps * lambda1;
    if (candidate || estimate < best.estimate) {
      Matrix u = v.leftCols(m) * yd;
      if (candidate) {
        const double exact = residual_norm(a, u, sd);
        out.check_matvecs += static_cast<std::size_t>(d);
        if (exact <= eps * lambda1) {
          out.values = std::move(sd);
          out.vectors = std::move(u);
          out.residual = exact;
          out.lambda1_estimate = lambda1;
          out.converged = true;
          return out;
        }
      }
      if (estimate < best.estimate) {
        best.estimate = estimate;
        best.lambda1 = lambda1;
        best.values = sd;
        best.vectors = std::move(u);
        best.iteration = out.iterations;
      }
    }

    if (out.iterations >= opts.max_restarts) {
      out.values = std::move(best.values);
      out.vectors = std::move(best.vectors);
      out.residual = residual_norm(a, out.vectors, out.values);
      out.check_matvecs += static_cast<std::size_t>(d);
      out.lambda1_estimate = best.lambda1;
      out.converged = false;
      return out;
    }

    // Thick restart: keep the leading `keep` Ritz vectors and the residual block.
    Matrix yk(m, keep);
    Vector sk(keep);
    for (Index c = 0; c < keep; ++c) {
      yk.col(c) = es.eigenvectors().col(order[static_cast<std::size_t>(c)]);
      sk(c) = theta(order[static_cast<std::size_t>(c)]);
    }
    const Matrix kept = v.leftCols(m) * yk;
    v.leftCols(keep) = kept;
    v.middleCols(keep, b) = v.middleCols(m, b).eval();
    v.rightCols(m + b - keep - b).setZero();
    t.setZero();
    t.topLeftCorner(keep, keep) = sk.asDiagonal();
    const Matrix new_coupling = coupling * yk;
    coupling.setZero();
    coupling.leftCols(keep) = new_coupling;
    j = keep;
  }
}

double estimate_spectral_norm(const SparseGraph& a, double tol, std::uint64_t seed,
                              std::size_t max_restarts) {
  if (a.m() == 0) throw EmptyGraph("estimate_spectral_norm: graph has no edges");
  LanczosOptions opts;
  opts.seed = seed;
  opts.max_restarts = max_restarts;
  const auto dec = truncated_eigs(a, 1, tol, opts);
  if (!dec.converged) {
    throw NoConvergence("estimate_spectral_norm: no convergence within max_restarts", max_restarts);
  }
  return std::abs(dec.values(0));
}

Matrix residual_matrix(const SparseGraph& a, const Eigen::Ref<const Matrix>& u,
                       const Eigen::Ref<const Vector>& s) {
  if (u.rows() != a.n() || s.size() != u.cols()) {
    throw DimensionMismatch("residual: U must be n x d and S must have d entries");
  }
  Matrix g = matvec_block(a, u);
  g.noalias() -= u * s.asDiagonal();
  return g;
}

double residual_norm(const SparseGraph& a, const Eigen::Ref<const Matrix>& u,
                     const Eigen::Ref<const Vector>& s) {
  return thin_spectral_norm(residual_matrix(a, u, s));
}

Vector excluded_eigenvalues(const Eigen::Ref<const Vector>& all, Index d) {
  if (d < 0 || d > all.size()) throw InvalidArgument("excluded_eigenvalues: d out of range");
  return all.tail(all.size() - d);
}

double ritz_gap_rho(const Eigen::Ref<const Vector>& ritz_values, const Eigen::Ref<const Vector>& excluded) {
  if (ritz_values.size() == 0 || excluded.size() == 0) {
    throw EmptySpectrum("ritz_gap_rho: both spectra must be nonempty");
  }
  double rho = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < ritz_values.size(); ++i) {
    rho = std::min(rho, (excluded.array() - ritz_values(i)).abs().minCoeff());
  }
  return rho;
}

}  // namespace spectol
