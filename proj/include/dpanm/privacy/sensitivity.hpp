//
// Copyright 2026 The dpanm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPANM_PRIVACY_SENSITIVITY_HPP_
#define DPANM_PRIVACY_SENSITIVITY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dpanm/errors.hpp"
#include "dpanm/privacy/params.hpp"
#include "dpanm/scores.hpp"

namespace dpanm {

enum class HsicBound { kLoose, kImproved };

// Global sensitivity w.r.t. substituting one test pair.
//   Spearman: 30/m, Kendall: 4/m,
//   HSIC: (12m-11)/(m-1)^2 (improved) or (16m-8)/(m-1)^2 (loose).
// The IQR and variance scores have no bounded global sensitivity.
inline SensitivityBound test_sensitivity(ScoreKind kind, std::size_t m,
                                         HsicBound hsic_bound =
                                             HsicBound::kImproved) {
  if (m < 2) throw DomainError("test_sensitivity: m must be >= 2");
  SensitivityInputs in{.m = m};
  switch (kind) {
    case ScoreKind::kSpearmanRho:
      return SensitivityBound::make(SensitivityFormula::kSpearmanTest, in);
    case ScoreKind::kKendallTau:
      return SensitivityBound::make(SensitivityFormula::kKendallTest, in);
    case ScoreKind::kHsic:
      return SensitivityBound::make(hsic_bound == HsicBound::kImproved
                                        ? SensitivityFormula::kHsicTest
                                        : SensitivityFormula::kHsicTestLoose,
                                    in);
    case ScoreKind::kIqr:
    case ScoreKind::kVariance:
      break;
  }
  throw UnsupportedError("test_sensitivity: score '" +
                         std::string(to_string(kind)) +
                         "' has no bounded global sensitivity");
}

// Sensitivity of HSIC(x', r') w.r.t. substituting one training pair, where the
// residual kernel is `lipschitz`-Lipschitz: (8/lambda^1.5) * 32 L sqrt(m) / n.
inline SensitivityBound train_sensitivity_hsic(std::size_t m, std::size_t n,
                                               double lambda,
                                               double lipschitz) {
  if (m < 2) throw DomainError("train_sensitivity_hsic: m must be >= 2");
  if (n < 1) throw DomainError("train_sensitivity_hsic: n must be >= 1");
  detail::require_unit_lambda(lambda, "train_sensitivity_hsic");
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
    throw DomainError("train_sensitivity_hsic: Lipschitz constant must be > 0");
  }
  return SensitivityBound::make(
      SensitivityFormula::kHsicTrain,
      {.m = m, .n = n, .lambda = lambda, .lipschitz = lipschitz});
}

inline constexpr std::uint64_t kMaxStabilityDistance = 1ULL << 52;

// Smallest gap between adjacent sorted values; 0 when any value repeats.
inline double min_adjacent_gap(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    gap = std::min(gap, sorted[i] - sorted[i - 1]);
  }
  return gap;
}

// Lower bound on the number of training substitutions needed before any two
// test residuals can swap order: floor(n * gap * lambda^1.5 / 16), where gap is
// the smallest distance between two sorted residuals. Each substitution moves
// every residual by at most 8/(n lambda^1.5), so two neighbours close at most
// twice that per substitution.
inline std::uint64_t rank_train_stability_distance(
    std::span<const double> test_residuals, std::size_t n, double lambda) {
  detail::require_min_length(test_residuals.size(), 2,
                             "rank_train_stability_distance");
  detail::require_finite(test_residuals, "rank_train_stability_distance");
  detail::require_unit_lambda(lambda, "rank_train_stability_distance");
  if (n < 1) throw DomainError("rank_train_stability_distance: n must be >= 1");
  const double gap = min_adjacent_gap(test_residuals);
  const double d = std::floor(static_cast<double>(n) * gap *
                              std::pow(lambda, 1.5) / 16.0);
  if (d >= static_cast<double>(kMaxStabilityDistance)) {
    return kMaxStabilityDistance;
  }
  return static_cast<std::uint64_t>(d);
}

}  // namespace dpanm

#endif  // DPANM_PRIVACY_SENSITIVITY_HPP_
