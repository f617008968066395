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

// Dependence scores between a candidate cause and a regression residual.
// Smaller scores mean "more independent". All functions are pure.

#ifndef DPANM_SCORES_HPP_
#define DPANM_SCORES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpanm/errors.hpp"
#include "dpanm/kernel.hpp"

namespace dpanm {

enum class ScoreKind { kSpearmanRho, kKendallTau, kHsic, kIqr, kVariance };

inline constexpr std::string_view to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kSpearmanRho:
      return "spearman";
    case ScoreKind::kKendallTau:
      return "kendall";
    case ScoreKind::kHsic:
      return "hsic";
    case ScoreKind::kIqr:
      return "iqr";
    case ScoreKind::kVariance:
      return "variance";
  }
  return "unknown";
}

inline ScoreKind parse_score_kind(std::string_view name) {
  for (ScoreKind kind :
       {ScoreKind::kSpearmanRho, ScoreKind::kKendallTau, ScoreKind::kHsic,
        ScoreKind::kIqr, ScoreKind::kVariance}) {
    if (name == to_string(kind)) return kind;
  }
  throw DomainError("unknown score kind '" + std::string(name) + "'");
}

inline constexpr bool is_rank_score(ScoreKind kind) {
  return kind == ScoreKind::kSpearmanRho || kind == ScoreKind::kKendallTau;
}

struct ScoreValue {
  ScoreKind kind;
  double value;
};

// 1-based ranks; a permutation of {1, ..., m}. Equal values are ranked in
// order of their original index.
class RankVector {
 public:
  explicit RankVector(std::vector<std::size_t> ranks)
      : ranks_(std::move(ranks)) {}

  std::size_t size() const { return ranks_.size(); }
  std::size_t operator[](std::size_t i) const { return ranks_[i]; }
  const std::vector<std::size_t>& ranks() const { return ranks_; }

  friend bool operator==(const RankVector&, const RankVector&) = default;

 private:
  std::vector<std::size_t> ranks_;
};

inline RankVector rank_vector(std::span<const double> values) {
  detail::require_min_length(values.size(), 1, "rank_vector");
  detail::require_finite(values, "rank_vector");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) {
                     return values[i] < values[j];
                   });
  std::vector<std::size_t> ranks(values.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    ranks[order[pos]] = pos + 1;
  }
  return RankVector(std::move(ranks));
}

namespace detail {

inline void check_pair(std::span<const double> a, std::span<const double> b,
                       const char* what) {
  require_same_length(a, b, what);
  require_min_length(a.size(), 2, what);
}

// Counts inversions of `seq` by merge sort; `seq` is left sorted.
inline std::uint64_t count_inversions(std::vector<std::size_t>& seq) {
  std::vector<std::size_t> buffer(seq.size());
  std::uint64_t inversions = 0;
  for (std::size_t width = 1; width < seq.size(); width *= 2) {
    for (std::size_t lo = 0; lo < seq.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, seq.size());
      const std::size_t hi = std::min(lo + 2 * width, seq.size());
      std::size_t i = lo, j = mid, out = lo;
      while (i < mid && j < hi) {
        if (seq[j] < seq[i]) {
          inversions += mid - i;
          buffer[out++] = seq[j++];
        } else {
          buffer[out++] = seq[i++];
        }
      }
      while (i < mid) buffer[out++] = seq[i++];
      while (j < hi) buffer[out++] = seq[j++];
    }
    seq.swap(buffer);
  }
  return inversions;
}

}  // namespace detail

// |1 - 6 sum d_i^2 / (m (m^2 - 1))| with d_i the rank differences.
inline ScoreValue spearman_rho(std::span<const double> a,
                               std::span<const double> b) {
  detail::check_pair(a, b, "spearman_rho");
  const RankVector ra = rank_vector(a);
  const RankVector rb = rank_vector(b);
  std::uint64_t sum_d2 = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const auto d = static_cast<std::int64_t>(ra[i]) -
                   static_cast<std::int64_t>(rb[i]);
    sum_d2 += static_cast<std::uint64_t>(d * d);
  }
  const double m = static_cast<double>(a.size());
  const double rho =
      1.0 - 6.0 * static_cast<double>(sum_d2) / (m * (m * m - 1.0));
  return {ScoreKind::kSpearmanRho, std::abs(rho)};
}

// |C - D| / (m (m - 1) / 2), O(m log m). Pairs are compared on ranks, so ties
// follow the stable index order of rank_vector().
inline ScoreValue kendall_tau(std::span<const double> a,
                              std::span<const double> b) {
  detail::check_pair(a, b, "kendall_tau");
  const RankVector ra = rank_vector(a);
  const RankVector rb = rank_vector(b);
  std::vector<std::size_t> by_a(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) by_a[ra[i] - 1] = rb[i];
  const std::uint64_t m = a.size();
  const std::uint64_t pairs = m * (m - 1) / 2;
  const std::uint64_t discordant = detail::count_inversions(by_a);
  const std::uint64_t concordant = pairs - discordant;
  const std::uint64_t gap = concordant > discordant ? concordant - discordant
                                                    : discordant - concordant;
  return {ScoreKind::kKendallTau,
          static_cast<double>(gap) / static_cast<double>(pairs)};
}

inline constexpr double kHsicClampTolerance = 1e-12;

// V-statistic HSIC estimate trace(K H L H) / (m - 1)^2, evaluated through
//   trace(KHLH) = sum_ij K_ij L_ij - (2/m) sum_i k_i l_i + (sum K)(sum L)/m^2
// with k, l the row sums. O(m^2) time, O(m) memory.
template <BoundedKernel KernelA, BoundedKernel KernelB>
ScoreValue hsic(std::span<const double> a, std::span<const double> b,
                const KernelA& ka, const KernelB& kb) {
  detail::check_pair(a, b, "hsic");
  detail::require_finite(a, "hsic");
  detail::require_finite(b, "hsic");
  const std::size_t m = a.size();
  std::vector<double> row_k(m, 0.0), row_l(m, 0.0);
  double sum_kl = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double kii = ka(a[i], a[i]);
    const double lii = kb(b[i], b[i]);
    sum_kl += kii * lii;
    row_k[i] += kii;
    row_l[i] += lii;
    for (std::size_t j = i + 1; j < m; ++j) {
      const double kij = ka(a[i], a[j]);
      const double lij = kb(b[i], b[j]);
      sum_kl += 2.0 * kij * lij;
      row_k[i] += kij;
      row_k[j] += kij;
      row_l[i] += lij;
      row_l[j] += lij;
    }
  }
  double cross = 0.0, total_k = 0.0, total_l = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    cross += row_k[i] * row_l[i];
    total_k += row_k[i];
    total_l += row_l[i];
  }
  const double md = static_cast<double>(m);
  const double trace = sum_kl - 2.0 * cross / md + total_k * total_l / (md * md);
  double value = trace / ((md - 1.0) * (md - 1.0));
  if (value < 0.0 && value >= -kHsicClampTolerance) value = 0.0;
  return {ScoreKind::kHsic, value};
}

template <BoundedKernel Kernel>
ScoreValue hsic(std::span<const double> a, std::span<const double> b,
                const Kernel& kernel) {
  return hsic(a, b, kernel, kernel);
}

// Median of |v_i - v_j| over i < j. For non-private use only: a bandwidth
// chosen from the data invalidates the HSIC sensitivity bounds.
inline double median_heuristic_bandwidth(std::span<const double> values) {
  detail::require_min_length(values.size(), 2, "median_heuristic_bandwidth");
  detail::require_finite(values, "median_heuristic_bandwidth");
  std::vector<double> gaps;
  gaps.reserve(values.size() * (values.size() - 1) / 2);
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      gaps.push_back(std::abs(values[i] - values[j]));
    }
  }
  const std::size_t mid = gaps.size() / 2;
  std::nth_element(gaps.begin(), gaps.begin() + mid, gaps.end());
  double median = gaps[mid];
  if (gaps.size() % 2 == 0) {
    const double below = *std::max_element(gaps.begin(), gaps.begin() + mid);
    median = 0.5 * (below + median);
  }
  if (!(median > 0.0)) {
    throw DegenerateDataError(
        "median_heuristic_bandwidth: median pairwise distance is zero");
  }
  return median;
}

// Linear-interpolation ("type 7") quantile of already sorted values.
// Infinite order statistics are handled without producing NaN.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0 || lo + 1 >= sorted.size()) return sorted[lo];
  const double x0 = sorted[lo], x1 = sorted[lo + 1];
  if (std::isinf(x0) || std::isinf(x1)) return (1.0 - frac) * x0 + frac * x1;
  return x0 + frac * (x1 - x0);
}

inline double iqr_sorted(std::span<const double> sorted) {
  return quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
}

inline double interquartile_range(std::span<const double> values) {
  detail::require_min_length(values.size(), 4, "interquartile_range");
  detail::require_finite(values, "interquartile_range");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return iqr_sorted(sorted);
}

inline double log_iqr(std::span<const double> values) {
  const double iqr = interquartile_range(values);
  if (!(iqr > 0.0)) {
    throw DegenerateDataError("log_iqr: interquartile range is zero");
  }
  return std::log(iqr);
}

inline ScoreValue iqr_score(std::span<const double> a,
                            std::span<const double> b) {
  return {ScoreKind::kIqr, log_iqr(a) + log_iqr(b)};
}

// Population variance (divides by m).
inline double population_variance(std::span<const double> values) {
  detail::require_min_length(values.size(), 1, "population_variance");
  detail::require_finite(values, "population_variance");
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size());
}

// Non-private baseline only; it has no bounded sensitivity of any kind.
inline ScoreValue variance_score(std::span<const double> a,
                                 std::span<const double> b) {
  const double va = population_variance(a);
  const double vb = population_variance(b);
  if (!(va > 0.0) || !(vb > 0.0)) {
    throw DegenerateDataError("variance_score: zero variance");
  }
  return {ScoreKind::kVariance, std::log(va) + std::log(vb)};
}

// Dispatches on `kind`. The kernel is used only for HSIC.
template <BoundedKernel Kernel>
ScoreValue compute_score(ScoreKind kind, std::span<const double> a,
                         std::span<const double> b, const Kernel& kernel) {
  switch (kind) {
    case ScoreKind::kSpearmanRho:
      return spearman_rho(a, b);
    case ScoreKind::kKendallTau:
      return kendall_tau(a, b);
    case ScoreKind::kHsic:
      return hsic(a, b, kernel);
    case ScoreKind::kIqr:
      return iqr_score(a, b);
    case ScoreKind::kVariance:
      return variance_score(a, b);
  }
  throw DomainError("compute_score: unknown kind");
}

}  // namespace dpanm

#endif  // DPANM_SCORES_HPP_
