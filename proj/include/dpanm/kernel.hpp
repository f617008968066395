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

#ifndef DPANM_KERNEL_HPP_
#define DPANM_KERNEL_HPP_

#include <cmath>
#include <concepts>
#include <string>

#include "dpanm/errors.hpp"

namespace dpanm {

// A symmetric kernel on the real line whose values never exceed 1. All
// sensitivity bounds in the library rely on the upper bound.
template <typename K>
concept BoundedKernel = std::copy_constructible<K> &&
                        requires(const K& k, double u, double v) {
                          { k(u, v) } -> std::convertible_to<double>;
                        };

// k(u, v) = exp(-(u - v)^2 / (2 h^2)), with values in (0, 1].
class SquaredExponentialKernel {
 public:
  explicit SquaredExponentialKernel(double bandwidth)
      : bandwidth_(bandwidth) {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
      throw DomainError("kernel bandwidth must be positive and finite, got " +
                        std::to_string(bandwidth));
    }
    inv_two_h2_ = 1.0 / (2.0 * bandwidth * bandwidth);
  }

  double operator()(double u, double v) const {
    const double d = u - v;
    return std::exp(-d * d * inv_two_h2_);
  }

  double bandwidth() const { return bandwidth_; }

  // Lipschitz constant of v -> k(u, v), taken as 1/h. The exact supremum of
  // the derivative is exp(-1/2)/h; see tight_lipschitz().
  double lipschitz() const { return 1.0 / bandwidth_; }
  double tight_lipschitz() const { return std::exp(-0.5) / bandwidth_; }

 private:
  double bandwidth_;
  double inv_two_h2_;
};

using KernelSpec = SquaredExponentialKernel;

static_assert(BoundedKernel<KernelSpec>);

}  // namespace dpanm

#endif  // DPANM_KERNEL_HPP_
