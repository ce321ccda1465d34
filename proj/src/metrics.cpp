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

#include "spectol/metrics.hpp"

#include <map>
#include <numbers>
#include <utility>

namespace spectol {

Silhouette silhouette_from_distances(const Eigen::MatrixXd& dist, std::span<const int> labels, int k) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (dist.rows() != n || dist.cols() != n) throw LengthMismatch("silhouette: one label per point required");
  if (k < 2) throw SingleCluster("silhouette: at least two clusters required");
  std::vector<Eigen::Index> size(static_cast<std::size_t>(k), 0);
  for (int l : labels) {
    if (l < 0 || l >= k) throw InvalidArgument("silhouette: label out of range");
    ++size[static_cast<std::size_t>(l)];
  }

  Silhouette out;
  out.values = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sums(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int own = labels[static_cast<std::size_t>(i)];
    if (size[static_cast<std::size_t>(own)] <= 1) continue;
    sums.setZero();
    for (Eigen::Index j = 0; j < n; ++j) sums(labels[static_cast<std::size_t>(j)]) += dist(i, j);
    const double a = sums(own) / static_cast<double>(size[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own || size[static_cast<std::size_t>(c)] == 0) continue;
      b = std::min(b, sums(c) / static_cast<double>(size[static_cast<std::size_t>(c)]));
    }
    if (!std::isfinite(b)) continue;
    const double denom = std::max(a, b);
    out.values(i) = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  out.cluster_means = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < n; ++i) out.cluster_means(labels[static_cast<std::size_t>(i)]) += out.values(i);
  for (int c = 0; c < k; ++c) {
    if (size[static_cast<std::size_t>(c)] > 0) out.cluster_means(c) /= static_cast<double>(size[static_cast<std::size_t>(c)]);
  }
  out.mean = n > 0 ? out.values.mean() : 0.0;
  return out;
}

KSelection choose_k_by_silhouette_from(const Eigen::MatrixXd& points, const Eigen::MatrixXd& dist,
                                       std::span<const int> k_range, std::uint64_t seed) {
  if (k_range.empty()) throw EmptyRange("choose_k_by_silhouette: empty k range");
  const auto n = static_cast<int>(points.rows());
  KSelection best;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<int> ks(k_range.begin(), k_range.end());
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  for (int k : ks) {
    if (k < 2 || k > n - 1) throw InvalidArgument("choose_k_by_silhouette: k must lie in [2, n - 1]");
    Clustering c = kmeans(points, k, seed);
    const double score = silhouette_from_distances(dist, c.labels, k).mean;
    best.scores.emplace_back(k, score);
    if (score > best_score) {
      best_score = score;
      best.k = k;
      best.clustering = std::move(c);
    }
  }
  return best;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw LengthMismatch("adjusted_rand_index: label vectors differ in length");
  const auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, count] : table) index += pairs(count);
  for (const auto& [key, count] : rows) sum_rows += pairs(count);
  for (const auto& [key, count] : cols) sum_cols += pairs(count);
  const double total = pairs(static_cast<double>(a.size()));
  const double expected = total > 0.0 ? sum_rows * sum_cols / total : 0.0;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  // Both partitions trivial (all-in-one or all-singletons): they agree.
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

ScreeElbow zhu_ghodsi_dimension(std::span<const double> scree) {
  const std::size_t p = scree.size();
  if (p < 2) throw TooFewValues("zhu_ghodsi_dimension: need at least two values");
  for (std::size_t i = 0; i < p; ++i) {
    if (!std::isfinite(scree[i])) throw InvalidArgument("zhu_ghodsi_dimension: non-finite value");
    if (i > 0 && scree[i] > scree[i - 1]) {
      throw InvalidArgument("zhu_ghodsi_dimension: scree must be non-increasing");
    }
  }
  ScreeElbow out;
  double best = -std::numeric_limits<double>::infinity();
  const double dp = static_cast<double>(p);
  for (std::size_t q = 1; q < p; ++q) {
    double ss = 0.0;
    for (const auto& [lo, hi] : {std::pair{std::size_t{0}, q}, std::pair{q, p}}) {
      double mean = 0.0;
      for (std::size_t i = lo; i < hi; ++i) mean += scree[i];
      mean /= static_cast<double>(hi - lo);
      for (std::size_t i = lo; i < hi; ++i) ss += (scree[i] - mean) * (scree[i] - mean);
    }
    const double var = ss / dp;
    const double ll = var > 0.0 ? -0.5 * dp * std::log(2.0 * std::numbers::pi * var) - 0.5 * dp
                                : std::numeric_limits<double>::infinity();
    out.log_likelihood.push_back(ll);
    if (ll > best) {
      best = ll;
      out.dimension = static_cast<int>(q);
    }
  }
  return out;
}

}  // namespace spectol
