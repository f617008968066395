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

// Kernel ridge regression
//
//   w* = argmin_w  (lambda/2) ||w||^2 + (1/n) sum_i (<w, phi(x_i)> - y_i)^2
//
// solved in the dual. Setting the gradient to zero with w = sum_i a_i phi(x_i)
// gives (K + (n lambda / 2) I) a = y, which is symmetric positive definite and
// is factored with a Cholesky decomposition.

#ifndef DPANM_REGRESSION_HPP_
#define DPANM_REGRESSION_HPP_

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpanm/errors.hpp"
#include "dpanm/kernel.hpp"

namespace dpanm {

using ResidualVector = std::vector<double>;

inline constexpr double kCholeskyJitter = 1e-10;

template <BoundedKernel Kernel = KernelSpec>
class FittedRegressor {
 public:
  FittedRegressor(std::vector<double> dual_coefficients,
                  std::vector<double> train_inputs, Kernel kernel,
                  double lambda)
      : alpha_(std::move(dual_coefficients)),
        train_x_(std::move(train_inputs)),
        kernel_(std::move(kernel)),
        lambda_(lambda) {
    if (alpha_.size() != train_x_.size() || alpha_.empty()) {
      throw DomainError("FittedRegressor: coefficient/input size mismatch");
    }
    detail::require_unit_lambda(lambda_, "FittedRegressor");
    for (double a : alpha_) alpha_l1_ += std::abs(a);
  }

  double predict(double x) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < alpha_.size(); ++i) {
      sum += alpha_[i] * kernel_(train_x_[i], x);
    }
    // |f(x)| <= sum |a_i| whenever k <= 1.
    if (std::abs(sum) > alpha_l1_ * (1.0 + 1e-12) + 1e-300) {
      throw std::logic_error(
          "FittedRegressor: prediction exceeds sum |alpha|; kernel is not "
          "bounded by 1");
    }
    return sum;
  }

  std::vector<double> predict(std::span<const double> xs) const {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(predict(x));
    return out;
  }

  const std::vector<double>& dual_coefficients() const { return alpha_; }
  const std::vector<double>& train_inputs() const { return train_x_; }
  const Kernel& kernel() const { return kernel_; }
  double lambda() const { return lambda_; }
  std::size_t size() const { return alpha_.size(); }

 private:
  std::vector<double> alpha_;
  std::vector<double> train_x_;
  Kernel kernel_;
  double lambda_;
  double alpha_l1_ = 0.0;
};

namespace detail {

inline void require_unit_box(std::span<const double> v, const char* what) {
  for (double e : v) {
    if (!std::isfinite(e) || std::abs(e) > 1.0) {
      throw DomainError(std::string(what) +
                        ": inputs must lie in [-1, 1]; normalize first");
    }
  }
}

}  // namespace detail

// Ridge term added to the kernel matrix: n * lambda / 2.
inline double dual_ridge(std::size_t n, double lambda) {
  return static_cast<double>(n) * lambda / 2.0;
}

template <BoundedKernel Kernel>
FittedRegressor<Kernel> fit_krr(std::span<const double> x_train,
                                std::span<const double> y_train,
                                const Kernel& kernel, double lambda) {
  detail::require_same_length(x_train, y_train, "fit_krr");
  detail::require_min_length(x_train.size(), 1, "fit_krr");
  detail::require_unit_lambda(lambda, "fit_krr");
  detail::require_unit_box(x_train, "fit_krr");
  detail::require_unit_box(y_train, "fit_krr");

  const auto n = static_cast<Eigen::Index>(x_train.size());
  Eigen::MatrixXd system(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double kij = kernel(x_train[i], x_train[j]);
      system(i, j) = kij;
      system(j, i) = kij;
    }
  }
  system.diagonal().array() += dual_ridge(x_train.size(), lambda);
  const Eigen::Map<const Eigen::VectorXd> y(y_train.data(), n);

  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) {
    system.diagonal().array() += kCholeskyJitter;
    llt.compute(system);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("fit_krr: dual system is not positive definite");
    }
  }
  Eigen::VectorXd alpha = llt.solve(y);
  // One step of iterative refinement keeps ||system a - y||_inf at round-off
  // level even for poorly conditioned kernels.
  alpha += llt.solve(y - system * alpha);

  return FittedRegressor<Kernel>(
      std::vector<double>(alpha.data(), alpha.data() + n),
      std::vector<double>(x_train.begin(), x_train.end()), kernel, lambda);
}

template <BoundedKernel Kernel>
ResidualVector residuals(const FittedRegressor<Kernel>& model,
                         std::span<const double> x_test,
                         std::span<const double> y_test) {
  detail::require_same_length(x_test, y_test, "residuals");
  detail::require_min_length(x_test.size(), 1, "residuals");
  ResidualVector out(x_test.size());
  for (std::size_t i = 0; i < x_test.size(); ++i) {
    out[i] = y_test[i] - model.predict(x_test[i]);
  }
  return out;
}

// Bound on the change of any test residual when one training pair is
// replaced: 8 / (n lambda^{3/2}), valid for lambda <= 1, |x|, |y| <= 1.
inline double residual_perturbation_bound(std::size_t n, double lambda) {
  detail::require_unit_lambda(lambda, "residual_perturbation_bound");
  if (n == 0) throw DomainError("residual_perturbation_bound: n must be >= 1");
  return 8.0 / (static_cast<double>(n) * std::pow(lambda, 1.5));
}

}  // namespace dpanm

#endif  // DPANM_REGRESSION_HPP_
