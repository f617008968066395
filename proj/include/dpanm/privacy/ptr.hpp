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

// Propose-test-release mechanisms.
//
// propose_test_release_stable() releases a statistic exactly when a noisy
// distance-to-instability clears ln(1/delta)/epsilon.
//
// private_log_iqr() releases ln IQR with Laplace noise after checking that the
// data sits deep inside one of two unit-width bins of ln IQR:
//   B1 = [floor(q), floor(q) + 1),  B2 = [floor(q + 1/2) - 1/2, floor(q + 1/2) + 1/2)
// with q = ln IQR. A_j is the smallest number of substituted points that moves
// ln IQR out of B_j; R_j = A_j + Lap(1/epsilon). If max_j R_j exceeds
// 1 + ln(1/delta)/epsilon the mechanism releases q + Lap(1/epsilon), otherwise
// bottom. Three Laplace draws are always consumed, in the order z_1, z_2 (for
// R_1, R_2) and z_3 (for the release).

#ifndef DPANM_PRIVACY_PTR_HPP_
#define DPANM_PRIVACY_PTR_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "dpanm/errors.hpp"
#include "dpanm/privacy/laplace.hpp"
#include "dpanm/privacy/params.hpp"
#include "dpanm/privacy/sensitivity.hpp"
#include "dpanm/random.hpp"
#include "dpanm/regression.hpp"
#include "dpanm/scores.hpp"

namespace dpanm {

inline ReleaseOutcome propose_test_release_stable(double value,
                                                  std::uint64_t distance,
                                                  const PrivacyParams& params,
                                                  NoiseStream& rng) {
  params.validate();
  if (params.delta <= 0.0) {
    throw UnsupportedError(
        "propose_test_release_stable: requires delta > 0 (no pure-DP variant)");
  }
  const double noisy = static_cast<double>(distance) +
                       laplace_sample(1.0 / params.epsilon, rng);
  const double threshold = std::log(1.0 / params.delta) / params.epsilon;
  return noisy > threshold ? ReleaseOutcome::released(value)
                           : ReleaseOutcome::bottom();
}

// Half-open interval [lo, hi) of ln IQR values. Infinite ends are allowed.
struct LogInterval {
  double lo;
  double hi;

  bool contains(double q) const { return q >= lo && q < hi; }
};

inline std::array<LogInterval, 2> iqr_bins(double log_iqr_value) {
  const double base = std::floor(log_iqr_value);
  const double shifted = std::floor(log_iqr_value + 0.5);
  return {LogInterval{base, base + 1.0},
          LogInterval{shifted - 0.5, shifted + 0.5}};
}

namespace detail {

// Extremes of the IQR reachable by substituting k of the m points of a sorted
// sample (substituted values are unrestricted reals).
//
// Largest IQR: a of the new points go to +inf and b = k - a to -inf, and a
// contiguous block of k original points is removed, so order statistic p
// becomes x_{p-b} below the block and x_{p+a} above it.
//
// Smallest IQR: the k new points all take one value c (an original value) and
// the removed points are the r smallest and k - r largest originals, so
// positions below the c-block shift up by r and positions above it shift down
// by k - r.
//
// Within each family only the configurations at which a quartile changes are
// evaluated. The exhaustive substitution oracle in the test suite checks that
// nothing outside the families does better.
class IqrReach {
 public:
  explicit IqrReach(std::vector<double> sorted) : x_(std::move(sorted)) {
    m_ = x_.size();
    const double h1 = static_cast<double>(m_ - 1) * 0.25;
    const double h3 = static_cast<double>(m_ - 1) * 0.75;
    l1_ = static_cast<std::size_t>(std::floor(h1));
    l3_ = static_cast<std::size_t>(std::floor(h3));
    f1_ = h1 - static_cast<double>(l1_);
    f3_ = h3 - static_cast<double>(l3_);
    first_index_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      first_index_[i] = (i > 0 && x_[i] == x_[i - 1]) ? first_index_[i - 1] : i;
    }
    next_start_.resize(m_ + 1, m_);
    for (std::size_t i = m_; i-- > 0;) {
      next_start_[i] = first_index_[i] == i ? i : next_start_[i + 1];
    }
  }

  std::size_t size() const { return m_; }

  double max_iqr(std::size_t k) const {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    if (k >= m_) return kInf;
    double best = iqr_sorted(x_);
    std::vector<std::size_t> starts;
    for (std::size_t a = 0; a <= k; ++a) {
      const std::size_t b = k - a;
      // Order statistic p reads x_j below the removed block and x_{j+k} above
      // it, j = p - b, so the IQR only changes where the block start s
      // crosses some j + 1 of a quartile position.
      starts.assign({0, m_ - k});
      for (std::size_t p : {l1_, l1_ + 1, l3_, l3_ + 1}) {
        if (p < b) continue;
        for (std::size_t s = p - b; s <= p - b + 1; ++s) {
          if (s <= m_ - k) starts.push_back(s);
        }
      }
      for (std::size_t s : starts) {
        auto y = [&](std::size_t p) -> Extended {
          if (p < b) return {-1.0, 0.0};
          if (p >= m_ - a) return {1.0, 0.0};
          const std::size_t j = p - b;
          return {0.0, j < s ? x_[j] : x_[j + k]};
        };
        const Extended q1 = quantile(y, l1_, f1_);
        const Extended q3 = quantile(y, l3_, f3_);
        if (q3.alpha > q1.alpha) return kInf;
        // Both quartiles among the points sent to the same infinity.
        if (q1.alpha != 0.0 || q3.alpha != 0.0) continue;
        best = std::max(best, q3.beta - q1.beta);
      }
    }
    return best;
  }

  double min_iqr(std::size_t k) const {
    if (k >= m_) return 0.0;
    double best = iqr_sorted(x_);
    const std::size_t kept = m_ - k;
    // Positions t of the block of new points at which it can touch a quartile
    // or its interpolation neighbour; elsewhere c does not affect the IQR.
    std::vector<std::pair<std::size_t, std::size_t>> windows;
    for (std::size_t p : {l1_, l3_}) {
      windows.emplace_back(p > k ? p - k : 0, std::min(kept, p + 2));
    }
    if (windows[1].first <= windows[0].second + 1) {
      windows = {{windows[0].first, windows[1].second}};
    }
    std::vector<std::pair<std::size_t, std::size_t>> gaps;
    std::size_t next = 0;
    for (const auto& [lo, hi] : windows) {
      if (lo > next) gaps.emplace_back(next, lo - 1);
      next = hi + 1;
    }
    if (next <= kept) gaps.emplace_back(next, kept);

    for (std::size_t r = 0; r <= k; ++r) {
      auto block_position = [&](std::size_t i) {
        return std::min(kept, first_index_[i] > r ? first_index_[i] - r : 0);
      };
      auto evaluate = [&](std::size_t i) {
        const double c = x_[i];
        const std::size_t t = block_position(i);
        auto y = [&](std::size_t p) -> Extended {
          if (p < t) return {0.0, x_[r + p]};
          if (p < t + k) return {0.0, c};
          return {0.0, x_[r + p - k]};
        };
        best = std::min(best, quantile(y, l3_, f3_).beta -
                                  quantile(y, l1_, f1_).beta);
      };
      // Distinct values whose block lands in [lo, hi].
      auto first_index_at = [&](std::size_t t) {
        return t == 0 ? std::size_t{0} : r + t;
      };
      for (const auto& [lo, hi] : windows) {
        const std::size_t end =
            hi >= kept ? m_ : std::min(m_, first_index_at(hi) + 1);
        for (std::size_t i = first_index_at(lo); i < end; ++i) {
          if (first_index_[i] == i) evaluate(i);
        }
      }
      // Inside a gap the IQR is constant; one representative suffices.
      for (const auto& [lo, hi] : gaps) {
        const std::size_t from = first_index_at(lo);
        if (from >= m_) continue;
        const std::size_t i = next_start_[from];
        if (i < m_ && block_position(i) <= hi) evaluate(i);
      }
    }
    return best;
  }

  bool escapes(std::size_t k, const LogInterval& interval) const {
    if (std::isfinite(interval.lo) && std::log(min_iqr(k)) < interval.lo) {
      return true;
    }
    if (std::isfinite(interval.hi)) {
      const double hi = max_iqr(k);
      if (std::isinf(hi) || std::log(hi) >= interval.hi) return true;
    }
    return false;
  }

 private:
  // alpha * M + beta for an arbitrarily large M: substituted points sent to
  // -inf / +inf have alpha = -1 / +1.
  struct Extended {
    double alpha;
    double beta;
  };

  // Same arithmetic as quantile_sorted().
  template <typename Accessor>
  Extended quantile(const Accessor& y, std::size_t lo, double frac) const {
    if (frac == 0.0 || lo + 1 >= m_) return y(lo);
    const Extended v0 = y(lo), v1 = y(lo + 1);
    return {v0.alpha + frac * (v1.alpha - v0.alpha),
            v0.beta + frac * (v1.beta - v0.beta)};
  }

  std::vector<double> x_;
  std::vector<std::size_t> first_index_;
  std::vector<std::size_t> next_start_;  // first i' >= i with a new value
  std::size_t m_ = 0;
  std::size_t l1_ = 0, l3_ = 0;
  double f1_ = 0.0, f3_ = 0.0;
};

}  // namespace detail

// Minimum number of point substitutions that moves ln IQR(values) out of
// `interval`. Returns 0 if it is already outside and m + 1 if no substitution
// can leave the interval (both ends infinite). The search stops at `limit`,
// returning min(count, limit).
inline std::uint64_t iqr_attack_count(
    std::span<const double> values, const LogInterval& interval,
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max()) {
  detail::require_min_length(values.size(), 4, "iqr_attack_count");
  detail::require_finite(values, "iqr_attack_count");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = iqr_sorted(sorted);
  if (!(iqr > 0.0)) {
    throw DegenerateDataError("iqr_attack_count: interquartile range is zero");
  }
  if (!interval.contains(std::log(iqr)) || limit == 0) return 0;

  const std::size_t m = sorted.size();
  const detail::IqrReach reach(std::move(sorted));
  if (limit <= m && !reach.escapes(limit, interval)) return limit;
  if (!reach.escapes(m, interval)) return std::min<std::uint64_t>(m + 1, limit);
  // The reachable set grows with k, so escapes() is monotone in k.
  std::size_t lo = 0, hi = 1;
  while (!reach.escapes(hi, interval)) {
    lo = hi;
    hi = std::min(2 * hi, m);
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (reach.escapes(mid, interval)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// Lower bound on the number of training substitutions that can move the IQR
// of the test residuals out of `interval`. Each substitution moves every
// residual, hence every order statistic and both quartiles, by at most
// `per_substitution_shift`, so t substitutions change the IQR by at most
// 2 t shift.
inline std::uint64_t train_iqr_attack_count(double iqr,
                                            const LogInterval& interval,
                                            double per_substitution_shift) {
  if (!(iqr > 0.0)) {
    throw DegenerateDataError("train_iqr_attack_count: zero IQR");
  }
  if (!(per_substitution_shift > 0.0)) {
    throw DomainError("train_iqr_attack_count: shift must be positive");
  }
  if (!interval.contains(std::log(iqr))) return 0;
  const double step = 2.0 * per_substitution_shift;
  // Rounding slack: at an exact boundary the smaller count is returned.
  constexpr double kSlack = 1e-9;
  double best = static_cast<double>(kMaxStabilityDistance);
  if (std::isfinite(interval.lo)) {
    best = std::min(
        best, std::floor((iqr - std::exp(interval.lo)) / step - kSlack) + 1.0);
  }
  if (std::isfinite(interval.hi)) {
    best = std::min(best, std::max(1.0, std::ceil((std::exp(interval.hi) - iqr) /
                                                      step -
                                                  kSlack)));
  }
  best = std::max(best, 1.0);
  return static_cast<std::uint64_t>(best);
}

// Everything private_log_iqr() saw, for auditing and replay.
struct IqrReleaseTrace {
  ReleaseOutcome outcome = ReleaseOutcome::bottom();
  std::optional<double> log_iqr;
  // The test-set search stops once a count is large enough to release, so
  // it may report min(count, that value); the decision is unaffected.
  std::array<std::uint64_t, 2> attack_counts{};
  std::array<double, 3> noise{};
  double threshold = 0.0;
};

inline double iqr_release_threshold(const PrivacyParams& params) {
  return 1.0 + std::log(1.0 / params.delta) / params.epsilon;
}

namespace detail {

inline void validate_iqr_params(const PrivacyParams& params, const char* what) {
  params.validate();
  if (params.delta <= 0.0) {
    throw UnsupportedError(std::string(what) + ": requires delta > 0");
  }
}

template <typename AttackCount>
IqrReleaseTrace run_iqr_ptr(std::span<const double> values,
                            const PrivacyParams& params, NoiseStream& rng,
                            AttackCount&& attack_count) {
  IqrReleaseTrace trace;
  const double scale = 1.0 / params.epsilon;
  for (double& z : trace.noise) z = laplace_sample(scale, rng);
  trace.threshold = iqr_release_threshold(params);

  const double iqr = interquartile_range(values);
  if (!(iqr > 0.0)) return trace;
  const double q = std::log(iqr);
  trace.log_iqr = q;
  const auto bins = iqr_bins(q);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < 2; ++j) {
    // Smallest count that releases given the noise already drawn.
    const double decisive = std::max(0.0, std::floor(trace.threshold -
                                                     trace.noise[j]) + 1.0);
    trace.attack_counts[j] = attack_count(
        iqr, bins[j],
        decisive >= static_cast<double>(kMaxStabilityDistance)
            ? kMaxStabilityDistance
            : static_cast<std::uint64_t>(decisive));
    best = std::max(best, static_cast<double>(trace.attack_counts[j]) +
                              trace.noise[j]);
  }
  if (best > trace.threshold) {
    trace.outcome = ReleaseOutcome::released(q + trace.noise[2]);
  }
  return trace;
}

}  // namespace detail

// (3 epsilon, delta)-DP release of ln IQR(values) w.r.t. substituting one of
// `values`. A zero IQR yields bottom rather than an error.
inline IqrReleaseTrace private_log_iqr_trace(std::span<const double> values,
                                             const PrivacyParams& params,
                                             NoiseStream& rng) {
  detail::validate_iqr_params(params, "private_log_iqr");
  detail::require_min_length(values.size(), 4, "private_log_iqr");
  return detail::run_iqr_ptr(values, params, rng,
                             [&](double, const LogInterval& bin,
                                 std::uint64_t decisive) {
                               return iqr_attack_count(values, bin, decisive);
                             });
}

inline ReleaseOutcome private_log_iqr(std::span<const double> values,
                                      const PrivacyParams& params,
                                      NoiseStream& rng) {
  return private_log_iqr_trace(values, params, rng).outcome;
}

// Same release for the IQR of test residuals, private w.r.t. substituting one
// of the n training pairs of a ridge regressor with regularization `lambda`.
inline IqrReleaseTrace private_log_iqr_train_trace(
    std::span<const double> test_residuals, std::size_t n, double lambda,
    const PrivacyParams& params, NoiseStream& rng) {
  detail::validate_iqr_params(params, "private_log_iqr_train");
  detail::require_min_length(test_residuals.size(), 4,
                             "private_log_iqr_train");
  const double shift = residual_perturbation_bound(n, lambda);
  return detail::run_iqr_ptr(test_residuals, params, rng,
                             [&](double iqr, const LogInterval& bin,
                                 std::uint64_t) {
                               return train_iqr_attack_count(iqr, bin, shift);
                             });
}

inline ReleaseOutcome private_log_iqr_train(
    std::span<const double> test_residuals, std::size_t n, double lambda,
    const PrivacyParams& params, NoiseStream& rng) {
  return private_log_iqr_train_trace(test_residuals, n, lambda, params, rng)
      .outcome;
}

}  // namespace dpanm

#endif  // DPANM_PRIVACY_PTR_HPP_
