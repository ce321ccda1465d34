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

// Stopping tolerances matched to the sampling error of adjacency spectral
// embeddings, and the quantities that bound that error.

#include <cstdint>

#include "spectol/graph_model.hpp"

namespace spectol {

enum class HeuristicVariant { Spectral, SqrtN, Conservative };

/// 1 / (ln(ln n) * sqrt(spectral_norm)). Requires n >= 16 so ln(ln n) > 0.
double heuristic_tolerance(Index n, double spectral_norm);

/// 1 / sqrt(delta(A)); usable before ||A||_2 is known since ||A||_2 <= delta(A).
double conservative_tolerance(const SparseGraph& a);

struct ToleranceReport {
  Index n = 0;
  double spectral_norm_estimate = 0.0;
  double delta_a = 0.0;
  double heuristic_spectral = 0.0;
  double heuristic_sqrt_n = 0.0;
  double conservative = 0.0;

  double value(HeuristicVariant v) const;
};

/// Bootstraps from the conservative tolerance: lambda_1 is computed to
/// relative accuracy `norm_tol` and the spectral heuristic follows from it.
ToleranceReport tolerance_report(const SparseGraph& a, std::uint64_t seed = 0, double norm_tol = 1e-8);

/// Diagonal of E[(A - P)^2] for hollow symmetric Bernoulli A:
///   D_ii = sum_{k != i} p_ik (1 - p_ik) + p_ii^2.
/// Off-diagonal entries vanish. O(n d^2).
Vector noise_second_moment_diagonal(const FactoredProbabilityMatrix& p);

/// C(P) = sqrt(tr(Sigma^-1 V^T E[(A - P)^2] V Sigma^-1)) over the top d
/// eigenpairs of P. Throws RankDeficient if lambda_d <= 1e-10 lambda_1.
double sampling_error_constant(const FactoredProbabilityMatrix& p, Index d);

/// Unit-constant terms of the two-sided bound on ||V W - U_hat||_F / ||A||_2.
struct BoundEnvelope {
  double cp = 0.0;
  double rho = 0.0;
  double eps = 0.0;
  double spectral_norm = 0.0;
  double lower_term = 0.0;        // C(P) / ||A||_2
  double algorithmic_term = 0.0;  // eps / rho
  double ratio = 0.0;             // algorithmic_term / lower_term
};

BoundEnvelope bound_envelope(double cp, double rho, double eps, double spectral_norm);

}  // namespace spectol
