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

// Error and agreement measures for embeddings and partitions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectol/errors.hpp"

namespace spectol {

template <typename Scalar>
struct ProcrustesResult {
  Scalar distance;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> rotation;  // Y * rotation ~ X
};

/// min over orthogonal O (reflections allowed) of ||X - Y O||_F.
template <typename DX, typename DY>
ProcrustesResult<typename DX::Scalar> procrustes_distance(const Eigen::MatrixBase<DX>& x,
                                                          const Eigen::MatrixBase<DY>& y) {
  using Scalar = typename DX::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionMismatch("procrustes_distance: X and Y must have the same shape");
  }
  const Mat cross = y.transpose() * x;
  Eigen::JacobiSVD<Mat> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ProcrustesResult<Scalar> out;
  out.rotation = svd.matrixU() * svd.matrixV().transpose();
  // ||X||^2 + ||Y||^2 - 2 sum(sigma) cancels badly near zero; evaluate directly.
  out.distance = (x - y * out.rotation).norm();
  return out;
}

template <typename Scalar>
struct CanonicalAngles {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> angles;  // decreasing, in [0, pi/2]
  Scalar sin_frobenius;                             // ||sin Psi||_F
};

template <typename Derived>
bool is_orthonormal(const Eigen::MatrixBase<Derived>& q, double tol = 1e-8) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Mat gram = q.transpose() * q;
  return (gram - Mat::Identity(q.cols(), q.cols())).norm() <= tol;
}

/// Principal angles between R(X) and R(Y) for orthonormal bases X, Y.
template <typename DX, typename DY>
CanonicalAngles<typename DX::Scalar> canonical_angles(const Eigen::MatrixBase<DX>& x,
                                                      const Eigen::MatrixBase<DY>& y) {
  using Scalar = typename DX::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionMismatch("canonical_angles: X and Y must have the same shape");
  }
  if (!is_orthonormal(x) || !is_orthonormal(y)) {
    throw NotOrthonormal("canonical_angles: inputs must have orthonormal columns");
  }
  const Mat cross = x.transpose() * y;
  const Mat away = y - x * cross;  // (I - X X^T) Y; its singular values are the sines
  const Vec cosines = Eigen::JacobiSVD<Mat>(cross).singularValues();  // descending
  const Vec sines = Eigen::JacobiSVD<Mat>(away).singularValues();     // descending
  const Eigen::Index d = x.cols();
  CanonicalAngles<Scalar> out;
  out.angles.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    // Largest angle pairs the smallest cosine with the largest sine.
    const Scalar c = std::clamp(cosines(d - 1 - i), Scalar(0), Scalar(1));
    const Scalar s = i < sines.size() ? std::clamp(sines(i), Scalar(0), Scalar(1)) : Scalar(0);
    out.angles(i) = std::atan2(s, c);
  }
  std::sort(out.angles.data(), out.angles.data() + d, std::greater<Scalar>());
  out.sin_frobenius = away.norm();
  return out;
}

struct Clustering {
  std::vector<int> labels;
  int k = 0;
  Eigen::MatrixXd centers;  // k x dim
  double wcss = 0.0;
  std::vector<double> wcss_history;  // after each assignment step of the winning run
};

namespace detail {

inline int nearest_center(const Eigen::MatrixXd& pts, Eigen::Index i, const Eigen::MatrixXd& centers,
                          double* dist2) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    const double dd = (pts.row(i) - centers.row(c)).squaredNorm();
    if (dd < best_d) {
      best_d = dd;
      best = static_cast<int>(c);
    }
  }
  if (dist2 != nullptr) *dist2 = best_d;
  return best;
}

inline Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& pts, int k, std::mt19937_64& rng) {
  const Eigen::Index n = pts.rows();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  Eigen::MatrixXd centers(k, pts.cols());
  auto first = static_cast<Eigen::Index>(unif(rng) * static_cast<double>(n));
  first = std::min(first, n - 1);
  centers.row(0) = pts.row(first);
  chosen[static_cast<std::size_t>(first)] = 1;
  Eigen::VectorXd d2 = (pts.rowwise() - pts.row(first)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double target = unif(rng) * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (d2(i) > 0.0 && acc >= target) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        for (Eigen::Index i = n - 1; i >= 0; --i) {
          if (d2(i) > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Every remaining point coincides with a center.
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
      }
    }
    centers.row(c) = pts.row(pick);
    chosen[static_cast<std::size_t>(pick)] = 1;
    d2 = d2.cwiseMin((pts.rowwise() - pts.row(pick)).rowwise().squaredNorm());
  }
  return centers;
}

inline Clustering lloyd(const Eigen::MatrixXd& pts, Eigen::MatrixXd centers, int max_iters) {
  const Eigen::Index n = pts.rows();
  const int k = static_cast<int>(centers.rows());
  Clustering out;
  out.k = k;
  out.labels.assign(static_cast<std::size_t>(n), -1);
  Eigen::VectorXd d2(n);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    double wcss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = nearest_center(pts, i, centers, &d2(i));
      wcss += d2(i);
      if (c != out.labels[static_cast<std::size_t>(i)]) {
        out.labels[static_cast<std::size_t>(i)] = c;
        changed = true;
      }
    }
    out.wcss_history.push_back(wcss);
    if (out.wcss_history.size() > 1) {
      const double prev = out.wcss_history[out.wcss_history.size() - 2];
      if (wcss > prev * (1.0 + 1e-12) + 1e-300) throw Error("kmeans: WCSS increased across a Lloyd step");
    }
    if (!changed && iter > 0) break;

    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, pts.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = out.labels[static_cast<std::size_t>(i)];
      sums.row(c) += pts.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: take over the worst-fit point from a cluster that can spare it.
      Eigen::Index worst = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int owner = out.labels[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(owner)] > 1 && (worst < 0 || d2(i) > d2(worst))) worst = i;
      }
      const int owner = out.labels[static_cast<std::size_t>(worst)];
      --counts[static_cast<std::size_t>(owner)];
      sums.row(owner) -= pts.row(worst);
      centers.row(owner) = sums.row(owner) / static_cast<double>(counts[static_cast<std::size_t>(owner)]);
      out.labels[static_cast<std::size_t>(worst)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      sums.row(c) = pts.row(worst);
      centers.row(c) = pts.row(worst);
      d2(worst) = 0.0;
    }
  }
  // Final centers are the means of the final partition.
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
  out.centers = Eigen::MatrixXd::Zero(k, pts.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = out.labels[static_cast<std::size_t>(i)];
    out.centers.row(c) += pts.row(i);
    ++counts[static_cast<std::size_t>(c)];
  }
  out.wcss = 0.0;
  for (int c = 0; c < k; ++c) out.centers.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.wcss += (pts.row(i) - out.centers.row(out.labels[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return out;
}

}  // namespace detail

/// Lloyd's algorithm from k-means++ seeds; the best WCSS over `restarts`
/// seeded initializations wins. Deterministic given `seed`.
template <typename Derived>
Clustering kmeans(const Eigen::MatrixBase<Derived>& points, int k, std::uint64_t seed,
                  int max_iters = 300, int restarts = 10) {
  const Eigen::MatrixXd pts = points.template cast<double>();
  if (pts.rows() == 0) throw InvalidArgument("kmeans: no points");
  if (k < 1) throw InvalidArgument("kmeans: k must be positive");
  if (k > pts.rows()) throw KTooLarge("kmeans: k exceeds the number of points");
  std::mt19937_64 rng(seed);
  Clustering best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    Clustering run = detail::lloyd(pts, detail::kmeanspp_seed(pts, k, rng), std::max(1, max_iters));
    if (run.wcss < best.wcss) best = std::move(run);
  }
  return best;
}

struct Silhouette {
  Eigen::VectorXd values;         // s(i)
  Eigen::VectorXd cluster_means;  // per cluster
  double mean = 0.0;
};

/// Silhouette widths from a precomputed n x n dissimilarity matrix.
Silhouette silhouette_from_distances(const Eigen::MatrixXd& dist, std::span<const int> labels, int k);

template <typename Derived>
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixBase<Derived>& points) {
  const Eigen::MatrixXd pts = points.template cast<double>();
  const Eigen::Index n = pts.rows();
  Eigen::MatrixXd dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist(i, j) = dist(j, i) = (pts.row(i) - pts.row(j)).norm();
    }
  }
  return dist;
}

/// Euclidean silhouette widths. Singletons score 0, as does 0/0.
template <typename Derived>
Silhouette silhouette_width(const Eigen::MatrixBase<Derived>& points, const Clustering& clustering) {
  if (static_cast<Eigen::Index>(clustering.labels.size()) != points.rows()) {
    throw LengthMismatch("silhouette_width: one label per point required");
  }
  return silhouette_from_distances(pairwise_distances(points), clustering.labels, clustering.k);
}

struct KSelection {
  int k = 0;
  Clustering clustering;
  std::vector<std::pair<int, double>> scores;  // (k, mean silhouette)
};

KSelection choose_k_by_silhouette_from(const Eigen::MatrixXd& points, const Eigen::MatrixXd& dist,
                                       std::span<const int> k_range, std::uint64_t seed);

/// k in `k_range` maximizing the mean silhouette width; ties go to the smaller k.
template <typename Derived>
KSelection choose_k_by_silhouette(const Eigen::MatrixBase<Derived>& points, std::span<const int> k_range,
                                  std::uint64_t seed) {
  const Eigen::MatrixXd pts = points.template cast<double>();
  return choose_k_by_silhouette_from(pts, pairwise_distances(pts), k_range, seed);
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

struct ScreeElbow {
  int dimension = 0;
  std::vector<double> log_likelihood;  // entry q - 1 is the split after the q-th value
  std::string variant = "two-segment gaussian, pooled variance";
};

/// Profile-likelihood elbow of a non-increasing scree.
ScreeElbow zhu_ghodsi_dimension(std::span<const double> scree);

}  // namespace spectol
