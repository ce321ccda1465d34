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
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "spectol/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace spectol {
namespace {

using testing::brute_force_ari;
using testing::brute_force_elbow;
using testing::brute_force_procrustes;

TEST(Procrustes, RotatedCopyHasZeroDistance) {
  const Eigen::MatrixXd x = testing::gaussian_matrix(30, 4, 1);
  const Eigen::MatrixXd o = testing::random_orthonormal(4, 4, 2);
  const auto r = procrustes_distance(x, x * o);
  EXPECT_LE(r.distance, 1e-10);
  EXPECT_LE((x - x * o * r.rotation).norm(), 1e-10);
}

TEST(Procrustes, SingleVectorAlwaysAligns) {
  Eigen::MatrixXd x(1, 2), y(1, 2);
  x << 1, 0;
  y << 0, 1;
  EXPECT_LE(procrustes_distance(x, y).distance, 1e-12);
}

TEST(Procrustes, MatchesBruteForceOverOrthogonalGroup) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Eigen::MatrixXd x = testing::gaussian_matrix(50, 3, 10 + seed);
    const Eigen::MatrixXd y = testing::gaussian_matrix(50, 3, 20 + seed);
    EXPECT_NEAR(procrustes_distance(x, y).distance, brute_force_procrustes(x, y), 1e-6);
  }
}

TEST(Procrustes, SingularValueFormulaAgrees) {
  const Eigen::MatrixXd x = testing::gaussian_matrix(40, 3, 4);
  const Eigen::MatrixXd y = testing::gaussian_matrix(40, 3, 5);
  const double sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(y.transpose() * x).singularValues().sum();
  const double formula = std::sqrt(x.squaredNorm() + y.squaredNorm() - 2.0 * sigma);
  EXPECT_NEAR(procrustes_distance(x, y).distance, formula, 1e-10);
}

TEST(Procrustes, SymmetryInvarianceAndIdentityBound) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd x = testing::gaussian_matrix(25, 3, 100 + seed);
    const Eigen::MatrixXd y = x + 0.3 * testing::gaussian_matrix(25, 3, 200 + seed);
    const Eigen::MatrixXd q = testing::random_orthonormal(3, 3, 300 + seed);
    const double dxy = procrustes_distance(x, y).distance;
    EXPECT_NEAR(dxy, procrustes_distance(y, x).distance, 1e-10);
    EXPECT_NEAR(dxy, procrustes_distance(x * q, y * q).distance, 1e-10);
    EXPECT_LE(dxy, (x - y).norm() + 1e-12);
  }
}

TEST(Procrustes, DimensionMismatch) {
  EXPECT_THROW(procrustes_distance(Eigen::MatrixXd(3, 2), Eigen::MatrixXd(3, 3)), DimensionMismatch);
}

TEST(CanonicalAngles, HandCases) {
  const Eigen::MatrixXd x = testing::random_orthonormal(10, 3, 1);
  const auto same = canonical_angles(x, x);
  EXPECT_LE(same.angles.cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_LE(same.sin_frobenius, 1e-12);
  Eigen::MatrixXd e1(2, 1), e2(2, 1);
  e1 << 1, 0;
  e2 << 0, 1;
  EXPECT_NEAR(canonical_angles(e1, e2).angles(0), std::numbers::pi / 2, 1e-15);
  EXPECT_THROW(canonical_angles(2.0 * e1, e2), NotOrthonormal);
}

TEST(CanonicalAngles, SineIdentityAndOrdering) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd x = testing::random_orthonormal(50, 3, seed);
    const Eigen::MatrixXd y = testing::random_orthonormal(50, 3, 1000 + seed);
    const auto c = canonical_angles(x, y);
    EXPECT_NEAR(c.sin_frobenius * c.sin_frobenius, 3.0 - (y.transpose() * x).squaredNorm(), 1e-10);
    EXPECT_NEAR(c.sin_frobenius, c.angles.array().sin().matrix().norm(), 1e-10);
    for (Eigen::Index i = 0; i < 3; ++i) {
      EXPECT_GE(c.angles(i), 0.0);
      EXPECT_LE(c.angles(i), std::numbers::pi / 2);
      if (i > 0) EXPECT_GE(c.angles(i - 1), c.angles(i));
    }
  }
}

Eigen::MatrixXd blobs(const std::vector<Eigen::Vector2d>& centers, int per, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(centers.size()) * per, 2);
  Eigen::Index r = 0;
  for (const auto& c : centers) {
    for (int i = 0; i < per; ++i, ++r) pts.row(r) = (c + Eigen::Vector2d(g(rng), g(rng))).transpose();
  }
  return pts;
}

std::vector<int> planted(int clusters, int per) {
  std::vector<int> out;
  for (int c = 0; c < clusters; ++c) out.insert(out.end(), static_cast<std::size_t>(per), c);
  return out;
}

TEST(KMeans, SingleCluster) {
  const Eigen::MatrixXd pts = testing::gaussian_matrix(20, 2, 3);
  const auto c = kmeans(pts, 1, 0);
  EXPECT_EQ(c.labels, std::vector<int>(20, 0));
  EXPECT_LE((c.centers.row(0) - pts.colwise().mean()).norm(), 1e-12);
}

TEST(KMeans, RecoversSeparatedBlobs) {
  const auto pts = blobs({{0, 0}, {20, 0}}, 40, 1.0, 7);
  const auto c = kmeans(pts, 2, 1);
  EXPECT_DOUBLE_EQ(adjusted_rand_index(c.labels, planted(2, 40)), 1.0);
}

TEST(KMeans, KEqualsN) {
  const Eigen::MatrixXd pts = testing::gaussian_matrix(6, 2, 3);
  const auto c = kmeans(pts, 6, 0);
  EXPECT_DOUBLE_EQ(c.wcss, 0.0);
  std::vector<int> sorted = c.labels;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<int>{0, 1, 2, 3, 4, 5}));
  EXPECT_THROW(kmeans(pts, 7, 0), KTooLarge);
}

TEST(KMeans, WcssNonIncreasingAndDeterministic) {
  const Eigen::MatrixXd pts = testing::gaussian_matrix(200, 3, 8);
  for (int k = 2; k <= 6; ++k) {
    const auto a = kmeans(pts, k, 42);
    const auto b = kmeans(pts, k, 42);
    EXPECT_EQ(a.labels, b.labels);
    for (std::size_t i = 1; i < a.wcss_history.size(); ++i) {
      EXPECT_LE(a.wcss_history[i], a.wcss_history[i - 1] * (1 + 1e-12));
    }
    for (int c = 0; c < k; ++c) EXPECT_NE(std::count(a.labels.begin(), a.labels.end(), c), 0);
  }
}

TEST(Silhouette, SeparatedBlobsApproachOne) {
  const auto pts = blobs({{0, 0}, {100, 0}}, 30, 1.0, 2);
  Clustering c;
  c.k = 2;
  c.labels = planted(2, 30);
  EXPECT_GE(silhouette_width(pts, c).mean, 0.95);
}

TEST(Silhouette, IdenticalPointsScoreZero) {
  const Eigen::MatrixXd pts = Eigen::MatrixXd::Ones(6, 2);
  Clustering c;
  c.k = 2;
  c.labels = {0, 1, 0, 1, 0, 1};
  EXPECT_EQ(silhouette_width(pts, c).values, Eigen::VectorXd::Zero(6));
}

TEST(Silhouette, LineHandCase) {
  Eigen::MatrixXd pts(4, 1);
  pts << 0, 0.1, 10, 10.1;
  Clustering c;
  c.k = 2;
  c.labels = {0, 0, 1, 1};
  const auto s = silhouette_width(pts, c);
  // Brute force from the pairwise distances.
  for (int i = 0; i < 4; ++i) {
    double a = 0, b = 0;
    for (int j = 0; j < 4; ++j) {
      if (j == i) continue;
      const double dist = std::abs(pts(i) - pts(j));
      (c.labels[i] == c.labels[j] ? a : b) += dist;
    }
    b /= 2.0;
    EXPECT_NEAR(s.values(i), (b - a) / std::max(a, b), 1e-15);
  }
  EXPECT_NEAR(s.values(0), (10.05 - 0.1) / 10.05, 1e-12);
  EXPECT_NEAR(s.values(0), 0.99005, 1e-5);
}

TEST(Silhouette, SingletonAndBounds) {
  const Eigen::MatrixXd pts = testing::gaussian_matrix(30, 2, 4);
  Clustering c;
  c.k = 3;
  c.labels.assign(30, 1);
  c.labels[0] = 0;
  for (int i = 20; i < 30; ++i) c.labels[static_cast<std::size_t>(i)] = 2;
  const auto s = silhouette_width(pts, c);
  EXPECT_EQ(s.values(0), 0.0);
  EXPECT_LE(s.values.cwiseAbs().maxCoeff(), 1.0);
  c.k = 1;
  c.labels.assign(30, 0);
  EXPECT_THROW(silhouette_width(pts, c), SingleCluster);
}

TEST(ChooseK, PlantedBlobs) {
  const auto three = blobs({{0, 0}, {30, 0}, {0, 30}}, 30, 1.0, 5);
  const std::vector<int> range{2, 3, 4, 5, 6};
  EXPECT_EQ(choose_k_by_silhouette(three, range, 1).k, 3);
  const auto two = blobs({{0, 0}, {30, 0}}, 30, 1.0, 6);
  EXPECT_EQ(choose_k_by_silhouette(two, range, 1).k, 2);
}

TEST(ChooseK, UniformSmokeAndErrors) {
  const Eigen::MatrixXd pts = testing::gaussian_matrix(40, 2, 9);
  const std::vector<int> range{2, 3};
  const auto sel = choose_k_by_silhouette(pts, range, 3);
  EXPECT_TRUE(sel.k == 2 || sel.k == 3);
  EXPECT_EQ(sel.scores.size(), 2u);
  EXPECT_THROW(choose_k_by_silhouette(pts, std::vector<int>{}, 3), EmptyRange);
  EXPECT_THROW(choose_k_by_silhouette(pts, std::vector<int>{40}, 3), InvalidArgument);
}

TEST(Ari, HandCases) {
  const std::vector<int> a{0, 0, 1, 1, 2, 2};
  const std::vector<int> relabeled{5, 5, 3, 3, 9, 9};
  EXPECT_DOUBLE_EQ(adjusted_rand_index(a, relabeled), 1.0);
  EXPECT_DOUBLE_EQ(adjusted_rand_index(std::vector<int>(6, 0), std::vector<int>{0, 1, 2, 3, 4, 5}), 0.0);
  const std::vector<int> x{1, 1, 1, 2, 2, 2, 3, 3, 3, 3}, y{1, 1, 2, 2, 3, 3, 3, 3, 3, 3};
  EXPECT_NEAR(adjusted_rand_index(x, y), brute_force_ari(x, y), 1e-14);
  EXPECT_THROW(adjusted_rand_index(x, a), LengthMismatch);
}

TEST(Ari, RandomPartitionsProperty) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 30);
    std::uniform_int_distribution<int> ka(0, static_cast<int>(rng() % 5)), kb(0, static_cast<int>(rng() % 5));
    std::vector<int> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    for (auto& v : a) v = ka(rng);
    for (auto& v : b) v = kb(rng);
    const double ari = adjusted_rand_index(a, b);
    EXPECT_GE(ari, -1.0);
    EXPECT_LE(ari, 1.0);
    EXPECT_DOUBLE_EQ(adjusted_rand_index(a, a), 1.0);
    std::vector<int> perm = b;
    for (auto& v : perm) v = 7 - v;
    EXPECT_NEAR(adjusted_rand_index(a, perm), ari, 1e-14);
    const double oracle = brute_force_ari(a, b);
    if (std::isfinite(oracle)) EXPECT_NEAR(ari, oracle, 1e-12);
  }
}

TEST(ZhuGhodsi, HandScrees) {
  const std::vector<double> a{100, 1, 1, 1, 1}, b{10, 9.5, 9, 1, 0.9, 0.8}, c{5, 5};
  EXPECT_EQ(brute_force_elbow(a), 1);
  EXPECT_EQ(brute_force_elbow(b), 3);
  EXPECT_EQ(zhu_ghodsi_dimension(a).dimension, 1);
  EXPECT_EQ(zhu_ghodsi_dimension(b).dimension, 3);
  EXPECT_EQ(zhu_ghodsi_dimension(c).dimension, 1);
  EXPECT_THROW(zhu_ghodsi_dimension(std::vector<double>{1.0}), TooFewValues);
}

TEST(ZhuGhodsi, RandomScreesMatchBruteForce) {
  std::mt19937_64 rng(2);
  std::exponential_distribution<double> e(1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(3 + rng() % 20);
    for (auto& v : s) v = e(rng);
    std::sort(s.begin(), s.end(), std::greater<>());
    EXPECT_EQ(zhu_ghodsi_dimension(s).dimension, brute_force_elbow(s));
  }
}

}  // namespace
}  // namespace spectol
