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

#ifndef DPANM_ERRORS_HPP_
#define DPANM_ERRORS_HPP_

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

namespace dpanm {

// Argument outside the documented domain of an operation (non-finite input,
// lambda out of range, mismatched lengths, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The data is valid input but the statistic is undefined on it, e.g. a zero
// interquartile range or a constant coordinate.
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The requested combination is not provided by any mechanism, e.g. a global
// sensitivity for the IQR score or a pure-DP propose-test-release.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed input file. The message names the offending line.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw DomainError(std::string(what) + ": non-finite input value");
    }
  }
}

inline void require_same_length(std::span<const double> a,
                                std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw DomainError(std::string(what) + ": length mismatch (" +
                      std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()) + ")");
  }
}

inline void require_min_length(std::size_t m, std::size_t min_m,
                               const char* what) {
  if (m < min_m) {
    throw DomainError(std::string(what) + ": need at least " +
                      std::to_string(min_m) + " samples, got " +
                      std::to_string(m));
  }
}

inline void require_unit_lambda(double lambda, const char* what) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw DomainError(std::string(what) + ": lambda must lie in (0, 1]");
  }
}

}  // namespace detail
}  // namespace dpanm

#endif  // DPANM_ERRORS_HPP_
