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

#ifndef DPANM_PRIVACY_PARAMS_HPP_
#define DPANM_PRIVACY_PARAMS_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dpanm/errors.hpp"

namespace dpanm {

struct PrivacyParams {
  double epsilon = 1.0;
  double delta = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw DomainError("epsilon must be positive and finite");
    }
    if (!(delta >= 0.0 && delta < 1.0)) {
      throw DomainError("delta must lie in [0, 1)");
    }
  }
};

// A cumulative (epsilon, delta) guarantee.
struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;

  friend PrivacyBudget operator+(PrivacyBudget a, PrivacyBudget b) {
    return {a.epsilon + b.epsilon, a.delta + b.delta};
  }
};

enum class SensitivityFormula {
  kSpearmanTest,
  kKendallTest,
  kHsicTest,
  kHsicTestLoose,
  kHsicTrain,
  kResidualBound,
};

inline constexpr std::string_view to_string(SensitivityFormula f) {
  switch (f) {
    case SensitivityFormula::kSpearmanTest:
      return "30/m";
    case SensitivityFormula::kKendallTest:
      return "4/m";
    case SensitivityFormula::kHsicTest:
      return "(12m-11)/(m-1)^2";
    case SensitivityFormula::kHsicTestLoose:
      return "(16m-8)/(m-1)^2";
    case SensitivityFormula::kHsicTrain:
      return "(8/lambda^1.5)*32*L*sqrt(m)/n";
    case SensitivityFormula::kResidualBound:
      return "8/(n*lambda^1.5)";
  }
  return "?";
}

struct SensitivityInputs {
  std::size_t m = 0;
  std::size_t n = 0;
  double lambda = 0.0;
  double lipschitz = 0.0;
};

inline double evaluate(SensitivityFormula formula,
                       const SensitivityInputs& in) {
  const double m = static_cast<double>(in.m);
  const double n = static_cast<double>(in.n);
  switch (formula) {
    case SensitivityFormula::kSpearmanTest:
      return 30.0 / m;
    case SensitivityFormula::kKendallTest:
      return 4.0 / m;
    case SensitivityFormula::kHsicTest:
      return (12.0 * m - 11.0) / ((m - 1.0) * (m - 1.0));
    case SensitivityFormula::kHsicTestLoose:
      return (16.0 * m - 8.0) / ((m - 1.0) * (m - 1.0));
    case SensitivityFormula::kHsicTrain:
      return (8.0 / std::pow(in.lambda, 1.5)) * 32.0 * in.lipschitz *
             std::sqrt(m) / n;
    case SensitivityFormula::kResidualBound:
      return 8.0 / (n * std::pow(in.lambda, 1.5));
  }
  return std::nan("");
}

// A global (or training-set) sensitivity together with the formula and the
// inputs that produced it.
struct SensitivityBound {
  double value = 0.0;
  SensitivityFormula formula = SensitivityFormula::kKendallTest;
  SensitivityInputs inputs;

  static SensitivityBound make(SensitivityFormula formula,
                               SensitivityInputs inputs) {
    return {evaluate(formula, inputs), formula, inputs};
  }

  // A hand-specified sensitivity (e.g. 0 in tests).
  static SensitivityBound exact(double value) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw DomainError("sensitivity must be finite and non-negative");
    }
    return {value, SensitivityFormula::kKendallTest, {}};
  }
};

// Either a released value or bottom (no release).
class ReleaseOutcome {
 public:
  static ReleaseOutcome released(double value) {
    return ReleaseOutcome(value);
  }
  static ReleaseOutcome bottom() { return ReleaseOutcome(); }

  bool is_released() const { return value_.has_value(); }
  bool is_bottom() const { return !value_.has_value(); }
  double value() const {
    if (!value_) throw std::logic_error("ReleaseOutcome: bottom has no value");
    return *value_;
  }
  const std::optional<double>& as_optional() const { return value_; }

  friend bool operator==(const ReleaseOutcome&,
                         const ReleaseOutcome&) = default;

 private:
  ReleaseOutcome() = default;
  explicit ReleaseOutcome(double v) : value_(v) {}

  std::optional<double> value_;
};

}  // namespace dpanm

#endif  // DPANM_PRIVACY_PARAMS_HPP_
