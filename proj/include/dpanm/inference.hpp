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

// Pairwise causal inference under the additive noise model.
//
// Fit y ~ f(x) and x ~ g(y) by kernel ridge regression on the training half,
// take residuals on the test half, and score how dependent each residual is on
// its putative cause:
//   s_xy = s(x', y' - f(x')),  s_yx = s(y', x' - g(y')).
// The direction with the smaller score wins. Private variants noise the two
// scores (or withhold them) so that the decision is differentially private
// w.r.t. the test set, the training set, or both.

#ifndef DPANM_INFERENCE_HPP_
#define DPANM_INFERENCE_HPP_

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpanm/data_io.hpp"
#include "dpanm/errors.hpp"
#include "dpanm/kernel.hpp"
#include "dpanm/privacy.hpp"
#include "dpanm/random.hpp"
#include "dpanm/regression.hpp"
#include "dpanm/scores.hpp"

namespace dpanm {

enum class Decision { kXCausesY, kYCausesX, kTie, kAbstain };

inline constexpr std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::kXCausesY:
      return "x->y";
    case Decision::kYCausesX:
      return "y->x";
    case Decision::kTie:
      return "tie";
    case Decision::kAbstain:
      return "abstain";
  }
  return "?";
}

inline Decision decide(double s_xy, double s_yx) {
  if (s_xy < s_yx) return Decision::kXCausesY;
  if (s_yx < s_xy) return Decision::kYCausesX;
  return Decision::kTie;
}

// Whether `d` agrees with `truth`; nullopt when there is nothing to compare.
inline std::optional<bool> is_correct(Decision d, Direction truth) {
  if (truth == Direction::kUnknown || d == Decision::kAbstain) {
    return std::nullopt;
  }
  return (d == Decision::kXCausesY && truth == Direction::kXCausesY) ||
         (d == Decision::kYCausesX && truth == Direction::kYCausesX);
}

struct InferenceReport {
  ScoreKind score_kind = ScoreKind::kHsic;
  double s_xy = 0.0;
  double s_yx = 0.0;
  double margin = 0.0;
  Decision decision = Decision::kTie;
};

inline InferenceReport make_report(ScoreKind kind, double s_xy, double s_yx) {
  return {kind, s_xy, s_yx, std::abs(s_yx - s_xy), decide(s_xy, s_yx)};
}

// Test data and residuals of both regressions. Regressions are the expensive
// part, so sweeps fit once and score many times.
struct AnmFit {
  std::vector<double> x_test;
  std::vector<double> y_test;
  ResidualVector r_y;  // y' - f(x')
  ResidualVector r_x;  // x' - g(y')
  std::size_t n = 0;
  double lambda = 0.0;

  std::size_t m() const { return x_test.size(); }
};

template <BoundedKernel Kernel>
AnmFit anm_fit(const SplitData& data, const Kernel& kernel, double lambda) {
  data.train.validate();
  data.test.validate();
  detail::require_min_length(data.n(), 1, "anm_fit (train)");
  detail::require_min_length(data.m(), 2, "anm_fit (test)");
  const auto f = fit_krr(data.train.x, data.train.y, kernel, lambda);
  const auto g = fit_krr(data.train.y, data.train.x, kernel, lambda);
  AnmFit fit;
  fit.x_test = data.test.x;
  fit.y_test = data.test.y;
  fit.r_y = residuals(f, data.test.x, data.test.y);
  fit.r_x = residuals(g, data.test.y, data.test.x);
  fit.n = data.n();
  fit.lambda = lambda;
  return fit;
}

template <BoundedKernel Kernel>
InferenceReport score_fit(const AnmFit& fit, ScoreKind kind,
                          const Kernel& kernel) {
  const double s_xy = compute_score(kind, fit.x_test, fit.r_y, kernel).value;
  const double s_yx = compute_score(kind, fit.y_test, fit.r_x, kernel).value;
  return make_report(kind, s_xy, s_yx);
}

// Non-private inference. The kernel serves both the regressions and HSIC.
template <BoundedKernel Kernel>
InferenceReport anm_infer(const SplitData& data, ScoreKind kind,
                          const Kernel& kernel, double lambda) {
  return score_fit(anm_fit(data, kernel, lambda), kind, kernel);
}

// Probability that the smaller of two scores stays smaller after adding
// independent Lap(0, sigma) noise to each, when the scores differ by gamma.
inline double utility_two_score(double gamma, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("utility_two_score: sigma must be > 0");
  if (!(gamma >= 0.0)) throw DomainError("utility_two_score: gamma must be >= 0");
  return 1.0 - (gamma + 2.0 * sigma) / (4.0 * sigma) * std::exp(-gamma / sigma);
}

// Same for sums of two scores per side, i.e. four independent Lap(0, sigma)
// draws in total.
inline double utility_four_score(double gamma, double sigma) {
  if (!(sigma > 0.0)) {
    throw DomainError("utility_four_score: sigma must be > 0");
  }
  if (!(gamma >= 0.0)) {
    throw DomainError("utility_four_score: gamma must be >= 0");
  }
  const double s = sigma, g = gamma;
  const double poly = 48.0 * s * s * s + 33.0 * s * s * g + 9.0 * s * g * g +
                      g * g * g;
  return 1.0 - std::exp(-g / s) * poly / (96.0 * s * s * s);
}

// Bound on the release probability of one private log-IQR when the data is
// close to a bin edge.
inline double iqr_release_failure_bound(double delta) {
  if (!(delta > 0.0 && delta < 2.0 / 3.0)) {
    throw DomainError("iqr_release_failure_bound: delta must lie in (0, 2/3)");
  }
  return 1.5 * delta;
}

enum class Target { kTest, kTrain, kBoth };

inline constexpr std::string_view to_string(Target t) {
  switch (t) {
    case Target::kTest:
      return "test";
    case Target::kTrain:
      return "train";
    case Target::kBoth:
      return "both";
  }
  return "?";
}

inline Target parse_target(std::string_view name) {
  if (name == "test") return Target::kTest;
  if (name == "train") return Target::kTrain;
  if (name == "both") return Target::kBoth;
  throw DomainError("unknown privacy target '" + std::string(name) + "'");
}

struct PrivateInferenceReport {
  ScoreKind score_kind = ScoreKind::kHsic;
  Target target = Target::kTest;
  ReleaseOutcome outcome_xy = ReleaseOutcome::bottom();
  ReleaseOutcome outcome_yx = ReleaseOutcome::bottom();
  // IQR only: releases for x', r_y, y', r_x in that order. Training-private
  // IQR leaves the x' and y' terms exact.
  std::vector<ReleaseOutcome> components;
  Decision decision = Decision::kAbstain;
  double noise_scale = 0.0;
  std::optional<double> predicted_utility;
  PrivacyBudget budget;
  // Non-private margin, NaN when the exact scores are undefined.
  double margin = std::numeric_limits<double>::quiet_NaN();
};

inline Decision decide_private(const ReleaseOutcome& xy,
                               const ReleaseOutcome& yx) {
  if (xy.is_bottom() || yx.is_bottom()) return Decision::kAbstain;
  return decide(xy.value(), yx.value());
}

struct PrivateConfig {
  PrivacyParams params;
  Target target = Target::kTest;
  // Advanced-composition slack for the test-private IQR path.
  double delta_prime = 1e-6;
  HsicBound hsic_bound = HsicBound::kImproved;
};

// Laplace path for rank and HSIC scores, private w.r.t. the m test pairs.
// Each score gets independent Lap(0, Delta/epsilon) noise, xy first.
inline PrivateInferenceReport private_test_infer(
    const InferenceReport& report, std::size_t m, const PrivacyParams& params,
    NoiseStream& rng, HsicBound hsic_bound = HsicBound::kImproved) {
  params.validate();
  const SensitivityBound delta = test_sensitivity(report.score_kind, m,
                                                  hsic_bound);
  PrivateInferenceReport out;
  out.score_kind = report.score_kind;
  out.target = Target::kTest;
  out.margin = report.margin;
  out.outcome_xy = ReleaseOutcome::released(
      laplace_mechanism(report.s_xy, delta, params.epsilon, rng));
  out.outcome_yx = ReleaseOutcome::released(
      laplace_mechanism(report.s_yx, delta, params.epsilon, rng));
  out.decision = decide_private(out.outcome_xy, out.outcome_yx);
  out.noise_scale = delta.value / params.epsilon;
  if (out.noise_scale > 0.0) {
    out.predicted_utility = utility_two_score(report.margin, out.noise_scale);
  }
  out.budget = {2.0 * params.epsilon, 0.0};
  return out;
}

namespace detail {

inline std::optional<double> exact_iqr_margin(const AnmFit& fit) {
  try {
    return score_fit(fit, ScoreKind::kIqr, KernelSpec(1.0)).margin;
  } catch (const DegenerateDataError&) {
    return std::nullopt;
  }
}

inline ReleaseOutcome sum_releases(const ReleaseOutcome& a,
                                   const ReleaseOutcome& b) {
  if (a.is_bottom() || b.is_bottom()) return ReleaseOutcome::bottom();
  return ReleaseOutcome::released(a.value() + b.value());
}

}  // namespace detail

// IQR path, private w.r.t. the test pairs. params.epsilon is the overall
// epsilon' of one vector's release; each of the four log-IQRs is released by
// private_log_iqr() with inner epsilon advanced_composition_budget()/3.
inline PrivateInferenceReport private_test_infer_iqr(
    const AnmFit& fit, const PrivacyParams& params, double delta_prime,
    NoiseStream& rng) {
  params.validate();
  const double per_mechanism =
      advanced_composition_budget(params.epsilon, delta_prime);
  const PrivacyParams inner{per_mechanism / 3.0, params.delta, params.seed};

  PrivateInferenceReport out;
  out.score_kind = ScoreKind::kIqr;
  out.target = Target::kTest;
  for (const auto* v : {&fit.x_test, &fit.r_y, &fit.y_test, &fit.r_x}) {
    out.components.push_back(private_log_iqr(*v, inner, rng));
  }
  out.outcome_xy = detail::sum_releases(out.components[0], out.components[1]);
  out.outcome_yx = detail::sum_releases(out.components[2], out.components[3]);
  out.decision = decide_private(out.outcome_xy, out.outcome_yx);
  out.noise_scale = 1.0 / inner.epsilon;
  if (auto margin = detail::exact_iqr_margin(fit)) {
    out.margin = *margin;
    out.predicted_utility = utility_four_score(*margin, out.noise_scale);
  }
  // Four (per_mechanism, delta) releases, composed sequentially.
  out.budget = {4.0 * per_mechanism, 4.0 * params.delta};
  return out;
}

// Training-private inference from precomputed residuals.
//   rank: exact scores released by propose-test-release, with the distance to
//         instability lower-bounded from the residual gaps.
//   HSIC: Laplace noise calibrated to the training-set sensitivity.
//   IQR:  private log-IQR of the residuals with attack counts lower-bounded by
//         the residual perturbation bound; the x' and y' terms are exact.
template <BoundedKernel Kernel>
PrivateInferenceReport private_train_infer(const AnmFit& fit, ScoreKind kind,
                                           const Kernel& kernel,
                                           const PrivacyParams& params,
                                           NoiseStream& rng) {
  params.validate();
  detail::require_unit_lambda(fit.lambda, "private_train_infer");
  PrivateInferenceReport out;
  out.score_kind = kind;
  out.target = Target::kTrain;
  const double eps = params.epsilon;

  if (is_rank_score(kind)) {
    const InferenceReport exact = score_fit(fit, kind, kernel);
    out.margin = exact.margin;
    const auto d_xy = rank_train_stability_distance(fit.r_y, fit.n, fit.lambda);
    const auto d_yx = rank_train_stability_distance(fit.r_x, fit.n, fit.lambda);
    out.outcome_xy = propose_test_release_stable(exact.s_xy, d_xy, params, rng);
    out.outcome_yx = propose_test_release_stable(exact.s_yx, d_yx, params, rng);
    out.noise_scale = 1.0 / eps;
    out.budget = {2.0 * eps, 2.0 * params.delta};
  } else if (kind == ScoreKind::kHsic) {
    const InferenceReport exact = score_fit(fit, kind, kernel);
    out.margin = exact.margin;
    const SensitivityBound delta = train_sensitivity_hsic(
        fit.m(), fit.n, fit.lambda, kernel.lipschitz());
    out.outcome_xy =
        ReleaseOutcome::released(laplace_mechanism(exact.s_xy, delta, eps, rng));
    out.outcome_yx =
        ReleaseOutcome::released(laplace_mechanism(exact.s_yx, delta, eps, rng));
    out.noise_scale = delta.value / eps;
    out.predicted_utility = utility_two_score(exact.margin, out.noise_scale);
    out.budget = {2.0 * eps, 0.0};
  } else if (kind == ScoreKind::kIqr) {
    const auto p_ry =
        private_log_iqr_train(fit.r_y, fit.n, fit.lambda, params, rng);
    const auto p_rx =
        private_log_iqr_train(fit.r_x, fit.n, fit.lambda, params, rng);
    std::optional<double> lx, ly;
    try {
      lx = log_iqr(fit.x_test);
      ly = log_iqr(fit.y_test);
    } catch (const DegenerateDataError&) {
      lx.reset();
    }
    const auto exact_term = [](const std::optional<double>& v) {
      return v ? ReleaseOutcome::released(*v) : ReleaseOutcome::bottom();
    };
    out.components = {lx ? exact_term(lx) : ReleaseOutcome::bottom(), p_ry,
                      lx ? exact_term(ly) : ReleaseOutcome::bottom(), p_rx};
    out.outcome_xy = detail::sum_releases(out.components[0], p_ry);
    out.outcome_yx = detail::sum_releases(out.components[2], p_rx);
    out.noise_scale = 1.0 / eps;
    if (auto margin = detail::exact_iqr_margin(fit)) {
      out.margin = *margin;
      out.predicted_utility = utility_two_score(*margin, out.noise_scale);
    }
    out.budget = {6.0 * eps, 2.0 * params.delta};
  } else {
    throw UnsupportedError("private_train_infer: score '" +
                           std::string(to_string(kind)) +
                           "' has no private variant");
  }
  out.decision = decide_private(out.outcome_xy, out.outcome_yx);
  return out;
}

// Split-level wrapper: fits the regressions, then releases privately.
template <BoundedKernel Kernel>
PrivateInferenceReport private_train_infer(const SplitData& data,
                                           ScoreKind kind,
                                           const Kernel& kernel, double lambda,
                                           const PrivacyParams& params,
                                           NoiseStream& rng) {
  detail::require_unit_lambda(lambda, "private_train_infer");
  return private_train_infer(anm_fit(data, kernel, lambda), kind, kernel,
                             params, rng);
}

// Dispatch on config.target. "both" is supported for HSIC only: the test and
// training Laplace noises are added to each score and the budgets summed. The
// rank and IQR training releases read the exact test residuals, so they are
// not test-private and cannot be combined this way.
template <BoundedKernel Kernel>
PrivateInferenceReport private_infer(const AnmFit& fit, ScoreKind kind,
                                     const Kernel& kernel,
                                     const PrivateConfig& config,
                                     NoiseStream& rng) {
  if (kind == ScoreKind::kVariance) {
    throw UnsupportedError("variance score has no private variant");
  }
  switch (config.target) {
    case Target::kTest:
      if (kind == ScoreKind::kIqr) {
        return private_test_infer_iqr(fit, config.params, config.delta_prime,
                                      rng);
      }
      return private_test_infer(score_fit(fit, kind, kernel), fit.m(),
                                config.params, rng, config.hsic_bound);
    case Target::kTrain:
      return private_train_infer(fit, kind, kernel, config.params, rng);
    case Target::kBoth: {
      if (kind != ScoreKind::kHsic) {
        throw UnsupportedError(
            "target 'both' is supported for the hsic score only");
      }
      PrivateInferenceReport test = private_test_infer(
          score_fit(fit, kind, kernel), fit.m(), config.params, rng,
          config.hsic_bound);
      const SensitivityBound train_delta = train_sensitivity_hsic(
          fit.m(), fit.n, fit.lambda, kernel.lipschitz());
      const double eps = config.params.epsilon;
      test.outcome_xy = ReleaseOutcome::released(laplace_mechanism(
          test.outcome_xy.value(), train_delta, eps, rng));
      test.outcome_yx = ReleaseOutcome::released(laplace_mechanism(
          test.outcome_yx.value(), train_delta, eps, rng));
      test.decision = decide_private(test.outcome_xy, test.outcome_yx);
      test.target = Target::kBoth;
      // The sum of two Laplace variables is not Laplace; the two-score
      // formula does not apply.
      test.noise_scale += train_delta.value / eps;
      test.predicted_utility.reset();
      test.budget = test.budget + PrivacyBudget{2.0 * eps, 0.0};
      return test;
    }
  }
  throw DomainError("private_infer: unknown target");
}

}  // namespace dpanm

#endif  // DPANM_INFERENCE_HPP_
