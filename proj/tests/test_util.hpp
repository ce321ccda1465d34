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

#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spectol/graph_model.hpp"

namespace spectol::testing {

// Erdos-Renyi graph; rejects nothing, so it may be disconnected.
inline SparseGraph erdos_renyi(Index n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (coin(rng)) edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(j));
    }
  }
  return SparseGraph::from_edges(n, edges);
}

inline SparseGraph complete_graph(Index n) {
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(j));
  }
  return SparseGraph::from_edges(n, edges);
}

inline SparseGraph star_graph(Index n) {
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (Index j = 1; j < n; ++j) edges.emplace_back(0, static_cast<Vertex>(j));
  return SparseGraph::from_edges(n, edges);
}

inline Eigen::MatrixXd random_orthonormal(Index n, Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < n; ++i) m(i, j) = g(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, d);
}

inline Eigen::MatrixXd gaussian_matrix(Index n, Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < n; ++i) m(i, j) = g(rng);
  }
  return m;
}

}  // namespace spectol::testing
