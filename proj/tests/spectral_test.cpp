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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "spectol/experiments.hpp"
#include "spectol/metrics.hpp"
#include "spectol/spectral.hpp"
#include "test_util.hpp"

namespace spectol {
namespace {

using testing::complete_graph;
using testing::erdos_renyi;

TEST(Matvec, SwapOnSingleEdge) {
  const auto k2 = complete_graph(2);
  Vector v(2);
  v << 1.0, 0.0;
  const Vector w = matvec(k2, v);
  EXPECT_EQ(w(0), 0.0);
  EXPECT_EQ(w(1), 1.0);
}

TEST(Matvec, EmptyGraphGivesZero) {
  const auto g = SparseGraph::from_edges(5, {});
  EXPECT_EQ(matvec(g, Vector::LinSpaced(5, 1.0, 5.0)), Vector::Zero(5));
}

TEST(Matvec, DimensionMismatch) {
  EXPECT_THROW(matvec(complete_graph(3), Vector::Ones(4)), DimensionMismatch);
  EXPECT_THROW(matvec_block(complete_graph(3), Matrix::Ones(4, 2)), DimensionMismatch);
}

TEST(Matvec, MatchesDenseProduct) {
  const auto g = erdos_renyi(200, 0.1, 3);
  const Matrix dense = g.dense();
  const Matrix v = testing::gaussian_matrix(200, 3, 4);
  EXPECT_LE((matvec(g, v.col(0)) - dense * v.col(0)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((matvec_block(g, v) - dense * v).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DenseOracle, Diagonal) {
  const Matrix m = Vector::Map(std::vector<double>{3, 1, 2}.data(), 3).asDiagonal();
  const auto e = dense_eig_oracle(m);
  EXPECT_EQ(e.values, (Vector(3) << 3, 2, 1).finished());
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(e.vectors(2, 1)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(e.vectors(1, 2)), 1.0, 1e-15);
}

TEST(DenseOracle, SwapMatrix) {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  const auto e = dense_eig_oracle(m);
  EXPECT_NEAR(e.values(0), 1.0, 1e-15);
  EXPECT_NEAR(e.values(1), -1.0, 1e-15);
  EXPECT_NEAR(std::abs(e.vectors(0, 0) + e.vectors(1, 0)), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(std::abs(e.vectors(0, 1) - e.vectors(1, 1)), std::sqrt(2.0), 1e-15);
}

TEST(DenseOracle, RandomSelfConsistency) {
  const Matrix g = testing::gaussian_matrix(50, 50, 9);
  const Matrix m = g + g.transpose();
  const auto e = dense_eig_oracle(m);
  const Matrix rebuilt = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
  EXPECT_LE((m - rebuilt).norm(), 1e-10 * m.norm());
  EXPECT_LE((e.vectors.transpose() * e.vectors - Matrix::Identity(50, 50)).norm(), 1e-10);
  for (Index i = 1; i < 50; ++i) EXPECT_GE(std::abs(e.values(i - 1)), std::abs(e.values(i)));
}

TEST(DenseOracle, OppositeSignTiePrefersPositive) {
  const auto e = dense_eig_oracle(testing::complete_graph(2).dense());
  EXPECT_GT(e.values(0), 0.0);
  Vector v(4);
  v << -3.0, 1.0, 3.0 * (1 + 1e-15), -0.5;
  const auto order = order_by_magnitude(v);
  EXPECT_EQ(order, (std::vector<Index>{2, 0, 1, 3}));
}

TEST(DenseOracle, Errors) {
  Matrix m(2, 2);
  m << 0, 1, 0.5, 0;
  EXPECT_THROW(dense_eig_oracle(m), NotSymmetric);
  EXPECT_THROW(dense_eig_oracle(Matrix(2, 3)), DimensionMismatch);
  EXPECT_THROW(dense_eig_oracle(Matrix(5001, 5001)), TooLarge);
}

TEST(TruncatedEigs, SingleEdge) {
  const auto dec = truncated_eigs(complete_graph(2), 1, 1e-10);
  EXPECT_TRUE(dec.converged);
  EXPECT_NEAR(dec.values(0), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(dec.vectors(0, 0)), 1.0 / std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(dec.vectors(0, 0), dec.vectors(1, 0), 1e-10);
  EXPECT_LE(dec.residual, 1e-10);
}

TEST(TruncatedEigs, CompleteGraph) {
  const auto dec = truncated_eigs(complete_graph(5), 1, 1e-10);
  EXPECT_NEAR(dec.values(0), 4.0, 1e-12);
  const Vector expected = Vector::Constant(5, 1.0 / std::sqrt(5.0));
  EXPECT_NEAR(std::abs(dec.vectors.col(0).dot(expected)), 1.0, 1e-12);
}

TEST(TruncatedEigs, Errors) {
  const auto g = complete_graph(5);
  EXPECT_THROW(truncated_eigs(g, 0, 1e-6), InvalidArgument);
  EXPECT_THROW(truncated_eigs(g, 5, 1e-6), InvalidArgument);
  EXPECT_THROW(truncated_eigs(g, 2, 0.0), InvalidArgument);
  EXPECT_THROW(truncated_eigs(SparseGraph::from_edges(5, {}), 1, 1e-6), DegenerateGraph);
}

TEST(TruncatedEigs, NoConvergenceReturnsBestIterate) {
  const auto g = erdos_renyi(300, 0.05, 2);
  LanczosOptions opts;
  opts.max_restarts = 1;
  opts.krylov_dim = 8;
  const auto dec = truncated_eigs(g, 3, 1e-14, opts);
  EXPECT_FALSE(dec.converged);
  EXPECT_EQ(dec.values.size(), 3);
  EXPECT_TRUE(is_orthonormal(dec.vectors));
}

// 50 random 0/1 graphs against the dense oracle.
TEST(TruncatedEigs, MatchesDenseOracle) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto g = erdos_renyi(100, 0.1 + 0.004 * static_cast<double>(seed), 100 + seed);
    const auto dec = truncated_eigs(g, 5, 1e-10, {.seed = seed});
    ASSERT_TRUE(dec.converged);
    const auto oracle = dense_eig_oracle(g.dense());
    EXPECT_LE((dec.values - oracle.values.head(5)).cwiseAbs().maxCoeff(), 1e-8) << seed;
    const auto angles = canonical_angles(oracle.vectors.leftCols(5), dec.vectors);
    EXPECT_LE(angles.sin_frobenius, 1e-6) << seed;
    EXPECT_LE((dec.vectors.transpose() * dec.vectors - Matrix::Identity(5, 5)).norm(), 1e-8);
    EXPECT_LE(dec.relative_residual(), 1e-10);
  }
}

TEST(TruncatedEigs, BlockVariantAgrees) {
  const auto g = erdos_renyi(150, 0.08, 7);
  const auto oracle = dense_eig_oracle(g.dense());
  for (Index b : {2, 3}) {
    LanczosOptions opts;
    opts.block_size = b;
    const auto dec = truncated_eigs(g, 4, 1e-10, opts);
    ASSERT_TRUE(dec.converged);
    EXPECT_EQ(dec.krylov_dim % b, 0);
    EXPECT_LE((dec.values - oracle.values.head(4)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(TruncatedEigs, NegativeOutlierIsKept) {
  // Complete bipartite K_{10,10}: spectrum {10, -10, 0...}.
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (Vertex i = 0; i < 10; ++i) {
    for (Vertex j = 10; j < 20; ++j) edges.emplace_back(i, j);
  }
  const auto dec = truncated_eigs(SparseGraph::from_edges(20, edges), 2, 1e-10);
  EXPECT_NEAR(dec.values(0), 10.0, 1e-10);
  EXPECT_NEAR(dec.values(1), -10.0, 1e-10);
}

TEST(TruncatedEigs, DeterministicAndMonotoneCost) {
  const FactoredProbabilityMatrix p(sbm_to_latent(three_block_sbm(600)));
  const auto g = sample_adjacency(p, 4);
  std::size_t previous = 0;
  for (int k = 1; k <= 16; ++k) {
    const double eps = std::exp2(-k);
    const auto a = truncated_eigs(g, 3, eps, {.seed = 9});
    const auto b = truncated_eigs(g, 3, eps, {.seed = 9});
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.vectors, b.vectors);
    EXPECT_GE(a.matvecs, previous) << k;
    previous = a.matvecs;
    ASSERT_TRUE(a.converged);
    EXPECT_LE(a.relative_residual(), eps);
  }
}

// Eigenvalues near the Ritz values lie within the residual norm, and the
// subspace error is bounded by residual / gap.
TEST(TruncatedEigs, KahanAndSinThetaBounds) {
  const FactoredProbabilityMatrix p(sbm_to_latent(three_block_sbm(300)));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = sample_adjacency(p, seed);
    const auto oracle = dense_eig_oracle(g.dense());
    for (double eps : {std::exp2(-4), std::exp2(-8), std::exp2(-12)}) {
      const auto dec = truncated_eigs(g, 3, eps, {.seed = seed});
      for (Index i = 0; i < 3; ++i) {
        const double nearest = (oracle.values.array() - dec.values(i)).abs().minCoeff();
        EXPECT_LE(nearest, dec.residual + 1e-10);
      }
      const double rho = ritz_gap_rho(dec.values, excluded_eigenvalues(oracle.values, 3));
      const double g_f = residual_matrix(g, dec.vectors, dec.values).norm();
      const auto angles = canonical_angles(oracle.vectors.leftCols(3), dec.vectors);
      if (rho > 0.0) EXPECT_LE(angles.sin_frobenius, g_f / rho + 1e-10);
    }
  }
}

TEST(EstimateSpectralNorm, SmallGraphs) {
  EXPECT_NEAR(estimate_spectral_norm(complete_graph(2)), 1.0, 1e-10);
  EXPECT_NEAR(estimate_spectral_norm(complete_graph(4)), 3.0, 1e-10);
  EXPECT_THROW(estimate_spectral_norm(SparseGraph::from_edges(3, {})), EmptyGraph);
}

TEST(EstimateSpectralNorm, SbmMatchesOracle) {
  const FactoredProbabilityMatrix p(sbm_to_latent(three_block_sbm(900)));
  const auto g = sample_adjacency(p, 1);
  const double lambda = estimate_spectral_norm(g, 1e-10);
  const auto oracle = dense_eig_oracle(g.dense());
  EXPECT_NEAR(lambda / oracle.values(0), 1.0, 1e-6);
}

TEST(ResidualNorm, ExactEigenpairsGiveZero) {
  const auto g = erdos_renyi(40, 0.2, 5);
  const auto oracle = dense_eig_oracle(g.dense());
  EXPECT_LE(residual_norm(g, oracle.vectors.leftCols(4), oracle.values.head(4)), 1e-12 * 40);
}

TEST(ResidualNorm, SingleEdgeHandCase) {
  Matrix u(2, 1);
  u << 1, 0;
  EXPECT_NEAR(residual_norm(complete_graph(2), u, Vector::Zero(1)), 1.0, 1e-15);
  EXPECT_THROW(residual_norm(complete_graph(2), u, Vector::Zero(2)), DimensionMismatch);
}

TEST(ResidualNorm, MatchesDenseSvd) {
  const auto g = erdos_renyi(80, 0.15, 6);
  const auto oracle = dense_eig_oracle(g.dense());
  Matrix u = oracle.vectors.leftCols(3) + 1e-3 * testing::gaussian_matrix(80, 3, 1);
  u = Eigen::HouseholderQR<Matrix>(u).householderQ() * Matrix::Identity(80, 3);
  const Vector s = oracle.values.head(3);
  const Matrix r = g.dense() * u - u * s.asDiagonal();
  const double expected = Eigen::JacobiSVD<Matrix>(r).singularValues()(0);
  EXPECT_NEAR(residual_norm(g, u, s), expected, 1e-10);
}

TEST(RitzGap, HandCases) {
  // min(|5 - 1|, |5 + 2|) = 4.
  EXPECT_EQ(ritz_gap_rho(Vector::Constant(1, 5.0), (Vector(2) << 1.0, -2.0).finished()), 4.0);
  EXPECT_EQ(ritz_gap_rho(Vector::Constant(1, 1.0), (Vector(2) << 1.0, -2.0).finished()), 0.0);
  EXPECT_THROW(ritz_gap_rho(Vector(0), Vector::Ones(2)), EmptySpectrum);
}

TEST(RitzGap, SbmRunIsWithinSpectralScale) {
  const FactoredProbabilityMatrix p(sbm_to_latent(three_block_sbm(300)));
  const auto g = sample_adjacency(p, 2);
  const auto dec = truncated_eigs(g, 3, std::exp2(-6));
  const auto oracle = dense_eig_oracle(g.dense());
  const double rho = ritz_gap_rho(dec.values, excluded_eigenvalues(oracle.values, 3));
  EXPECT_GT(rho / dec.lambda1_estimate, 0.0);
  EXPECT_LE(rho / dec.lambda1_estimate, 1.0);
}

}  // namespace
}  // namespace spectol
