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

// Slow reference implementations used as test oracles. None of them share
// code with the library beyond the kernel and the quantile definition.

#ifndef DPANM_TESTS_ORACLES_HPP_
#define DPANM_TESTS_ORACLES_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "dpanm/kernel.hpp"

namespace dpanm::testing {

// O(m^2) Kendall: enumerate all pairs; ties broken by index.
inline double kendall_bruteforce(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  auto before = [](const std::vector<double>& v, std::size_t i,
                   std::size_t j) {
    return v[i] < v[j] || (v[i] == v[j] && i < j);
  };
  std::int64_t c = 0, d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if (before(a, i, j) == before(b, i, j)) {
        ++c;
      } else {
        ++d;
      }
    }
  }
  const auto pairs = static_cast<std::int64_t>(a.size() * (a.size() - 1) / 2);
  return static_cast<double>(std::abs(c - d)) / static_cast<double>(pairs);
}

// trace(K H L H) / (m - 1)^2 with explicit dense matrices.
inline double hsic_naive(const std::vector<double>& a,
                         const std::vector<double>& b,
                         const SquaredExponentialKernel& k) {
  const auto m = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd K(m, m), L(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      K(i, j) = k(a[i], a[j]);
      L(i, j) = k(b[i], b[j]);
    }
  }
  const Eigen::MatrixXd H =
      Eigen::MatrixXd::Identity(m, m) -
      Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m));
  const double md = static_cast<double>(m);
  return (K * H * L * H).trace() / ((md - 1.0) * (md - 1.0));
}

// Type-7 quantile of an unsorted vector, by full sort.
inline double quantile7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double iqr_oracle(const std::vector<double>& v) {
  return quantile7(v, 0.75) - quantile7(v, 0.25);
}

// Smallest k <= max_k such that replacing some k entries of `values` by
// values from `grid` moves ln IQR out of [lo, hi); nullopt if none does.
// Exhaustive over index subsets and grid assignments.
inline std::optional<std::size_t> iqr_attack_bruteforce(
    const std::vector<double>& values, double lo, double hi,
    const std::vector<double>& grid, std::size_t max_k) {
  const std::size_t m = values.size();
  auto escapes = [&](const std::vector<double>& v) {
    const double iqr = iqr_oracle(v);
    const double q = iqr > 0.0 ? std::log(iqr)
                               : -std::numeric_limits<double>::infinity();
    return !(q >= lo && q < hi);
  };
  if (escapes(values)) return 0;
  for (std::size_t k = 1; k <= std::min(max_k, m); ++k) {
    std::vector<std::size_t> idx(k);
    // Enumerate k-subsets in lexicographic order.
    for (std::size_t j = 0; j < k; ++j) idx[j] = j;
    while (true) {
      std::vector<std::size_t> choice(k, 0);
      while (true) {
        std::vector<double> v = values;
        for (std::size_t j = 0; j < k; ++j) v[idx[j]] = grid[choice[j]];
        if (escapes(v)) return k;
        std::size_t j = 0;
        while (j < k && ++choice[j] == grid.size()) choice[j++] = 0;
        if (j == k) break;
      }
      std::size_t j = k;
      while (j > 0 && idx[j - 1] == m - k + (j - 1)) --j;
      if (j == 0) break;
      ++idx[j - 1];
      for (std::size_t t = j; t < k; ++t) idx[t] = idx[t - 1] + 1;
    }
  }
  return std::nullopt;
}

// Data values, midpoints of adjacent distinct values and two far points.
inline std::vector<double> substitution_grid(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> grid = values;
  for (std::size_t i = 1; i < values.size(); ++i) {
    grid.push_back(0.5 * (values[i - 1] + values[i]));
  }
  grid.push_back(-1e6);
  grid.push_back(1e6);
  std::sort(grid.begin(), grid.end());
  return grid;
}

// Bounded polynomial kernel on [-1, 1]: ((1 + uv) / 2)^2 = <phi(u), phi(v)>
// with phi(u) = (1, sqrt(2) u, u^2) / 2.
struct QuadraticKernel {
  double operator()(double u, double v) const {
    const double s = (1.0 + u * v) / 2.0;
    return s * s;
  }
  static Eigen::Vector3d features(double u) {
    return Eigen::Vector3d(1.0, std::sqrt(2.0) * u, u * u) / 2.0;
  }
};

// argmin_w (lambda/2) |w|^2 + (1/n) sum_i (<w, phi(x_i)> - y_i)^2 in the
// explicit feature space, from its normal equations.
inline Eigen::Vector3d primal_ridge_quadratic(const std::vector<double>& x,
                                              const std::vector<double>& y,
                                              double lambda) {
  const double n = static_cast<double>(x.size());
  Eigen::Matrix3d A = (lambda / 2.0) * Eigen::Matrix3d::Identity();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Eigen::Vector3d f = QuadraticKernel::features(x[i]);
    A += f * f.transpose() / n;
    rhs += f * y[i] / n;
  }
  return A.colPivHouseholderQr().solve(rhs);
}

// Minimizes J(beta) = (lambda/2) beta' K beta + (1/n) |K beta - y|^2 over
// beta (the same objective restricted to w = sum_i beta_i phi(x_i)) by
// solving the stationarity condition (lambda K + (2/n) K^2) beta = (2/n) K y
// with a rank-revealing decomposition; returns beta.
template <typename Kernel>
Eigen::VectorXd representer_minimizer(const std::vector<double>& x,
                                      const std::vector<double>& y,
                                      const Kernel& k, double lambda) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) K(i, j) = k(x[i], x[j]);
  }
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  const double nd = static_cast<double>(n);
  const Eigen::MatrixXd H = lambda * K + (2.0 / nd) * K * K;
  const Eigen::VectorXd g = (2.0 / nd) * K * yv;
  return H.completeOrthogonalDecomposition().solve(g);
}

}  // namespace dpanm::testing

#endif  // DPANM_TESTS_ORACLES_HPP_
