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

#include "spectol/tolerance.hpp"

#include <cmath>
#include <limits>

#include "spectol/spectral.hpp"

namespace spectol {

double heuristic_tolerance(Index n, double spectral_norm) {
  if (n < 16) throw DomainError("heuristic_tolerance: n must be at least 16");
  if (!(spectral_norm > 0.0)) throw DomainError("heuristic_tolerance: spectral norm must be positive");
  return 1.0 / (std::log(std::log(static_cast<double>(n))) * std::sqrt(spectral_norm));
}

double conservative_tolerance(const SparseGraph& a) {
  if (a.m() == 0) throw EmptyGraph("conservative_tolerance: graph has no edges");
  return 1.0 / std::sqrt(max_row_sum(a));
}

double ToleranceReport::value(HeuristicVariant v) const {
  switch (v) {
    case HeuristicVariant::Spectral: return heuristic_spectral;
    case HeuristicVariant::SqrtN: return heuristic_sqrt_n;
    case HeuristicVariant::Conservative: return conservative;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

ToleranceReport tolerance_report(const SparseGraph& a, std::uint64_t seed, double norm_tol) {
  ToleranceReport r;
  r.n = a.n();
  r.delta_a = max_row_sum(a);
  r.conservative = conservative_tolerance(a);
  r.spectral_norm_estimate = estimate_spectral_norm(a, norm_tol, seed);
  r.heuristic_spectral = heuristic_tolerance(a.n(), r.spectral_norm_estimate);
  r.heuristic_sqrt_n = heuristic_tolerance(a.n(), static_cast<double>(a.n()));
  return r;
}

Vector noise_second_moment_diagonal(const FactoredProbabilityMatrix& p) {
  const Matrix& x = p.X();
  const Vector total = x.colwise().sum().transpose();
  const Matrix gram = x.transpose() * x;
  Vector out(p.n());
  for (Index i = 0; i < p.n(); ++i) {
    const auto xi = x.row(i);
    const double row_sum = xi.dot(total.transpose());  // sum_k p_ik
    const double row_sq = (xi * gram).dot(xi);  // sum_k p_ik^2
    const double pii = xi.squaredNorm();
    // Drop k = i from the Bernoulli variance sum, then add the deterministic p_ii^2.
    out(i) = (row_sum - row_sq) - pii * (1.0 - pii) + pii * pii;
  }
  return out;
}

double sampling_error_constant(const FactoredProbabilityMatrix& p, Index d) {
  if (d < 1) throw InvalidArgument("sampling_error_constant: d must be positive");
  const auto spec = p.spectrum(0.0);
  if (spec.values.size() < d || !(spec.values(d - 1) > 1e-10 * spec.values(0))) {
    throw RankDeficient("sampling_error_constant: rank(P) is below d");
  }
  const Vector noise = noise_second_moment_diagonal(p);
  double trace = 0.0;
  for (Index c = 0; c < d; ++c) {
    const double sigma = spec.values(c);
    trace += spec.vectors.col(c).cwiseAbs2().dot(noise) / (sigma * sigma);
  }
  return std::sqrt(trace);
}

BoundEnvelope bound_envelope(double cp, double rho, double eps, double spectral_norm) {
  if (!(rho > 0.0)) throw ZeroRho("bound_envelope: rho must be positive");
  if (!(spectral_norm > 0.0)) throw InvalidArgument("bound_envelope: spectral norm must be positive");
  if (cp < 0.0 || eps < 0.0) throw InvalidArgument("bound_envelope: negative input");
  BoundEnvelope e;
  e.cp = cp;
  e.rho = rho;
  e.eps = eps;
  e.spectral_norm = spectral_norm;
  e.lower_term = cp / spectral_norm;
  e.algorithmic_term = eps / rho;
  e.ratio = e.lower_term > 0.0 ? e.algorithmic_term / e.lower_term
                               : std::numeric_limits<double>::infinity();
  return e;
}

}  // namespace spectol
