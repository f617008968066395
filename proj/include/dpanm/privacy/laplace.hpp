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

#ifndef DPANM_PRIVACY_LAPLACE_HPP_
#define DPANM_PRIVACY_LAPLACE_HPP_

#include <cmath>

#include "dpanm/errors.hpp"
#include "dpanm/privacy/params.hpp"
#include "dpanm/random.hpp"

namespace dpanm {

// Lap(0, scale) by inversion of the CDF on one uniform draw u in (0, 1):
// x = -scale * sgn(u - 1/2) * ln(1 - 2|u - 1/2|). Consumes exactly one draw.
inline double laplace_sample(double scale, NoiseStream& rng) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("laplace_sample: scale must be positive and finite");
  }
  const double u = rng.uniform_open() - 0.5;
  const double magnitude = -scale * std::log1p(-2.0 * std::abs(u));
  return u < 0.0 ? -magnitude : magnitude;
}

// value + Lap(0, sensitivity / epsilon). A zero sensitivity returns `value`
// unchanged but still consumes one draw so that stream positions do not
// depend on the data.
inline double laplace_mechanism(double value,
                                const SensitivityBound& sensitivity,
                                double epsilon, NoiseStream& rng) {
  if (!(epsilon > 0.0)) {
    throw DomainError("laplace_mechanism: epsilon must be positive");
  }
  if (!(sensitivity.value >= 0.0)) {
    throw DomainError("laplace_mechanism: negative sensitivity");
  }
  if (sensitivity.value == 0.0) {
    rng();
    return value;
  }
  return value + laplace_sample(sensitivity.value / epsilon, rng);
}

}  // namespace dpanm

#endif  // DPANM_PRIVACY_LAPLACE_HPP_
