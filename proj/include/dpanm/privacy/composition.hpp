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

#ifndef DPANM_PRIVACY_COMPOSITION_HPP_
#define DPANM_PRIVACY_COMPOSITION_HPP_

#include <cmath>

#include "dpanm/errors.hpp"
#include "dpanm/privacy/params.hpp"

namespace dpanm {

// Per-mechanism budget eps_k such that three (eps_k, delta)-DP releases
// compose to (epsilon_total, 3 delta + delta_prime) under advanced
// composition: eps_k = epsilon_total / (2 sqrt(6 ln(1/delta_prime))).
// Callers split eps_k three ways for the inner Laplace draws of
// private_log_iqr().
inline double advanced_composition_budget(double epsilon_total,
                                          double delta_prime) {
  if (!(epsilon_total > 0.0 && epsilon_total <= 1.0)) {
    throw DomainError("advanced_composition_budget: epsilon must lie in (0, 1]");
  }
  if (!(delta_prime > 0.0 && delta_prime < 1.0)) {
    throw DomainError(
        "advanced_composition_budget: delta_prime must lie in (0, 1)");
  }
  return epsilon_total / (2.0 * std::sqrt(6.0 * std::log(1.0 / delta_prime)));
}

// Budget reported for three composed releases of one vector.
inline PrivacyBudget advanced_composition_total(double epsilon_total,
                                                double delta,
                                                double delta_prime) {
  return {epsilon_total, 3.0 * delta + delta_prime};
}

}  // namespace dpanm

#endif  // DPANM_PRIVACY_COMPOSITION_HPP_
