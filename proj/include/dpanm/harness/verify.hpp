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

// Empirical checks of the closed-form utility predictions and of the
// sensitivity bounds.

#ifndef DPANM_HARNESS_VERIFY_HPP_
#define DPANM_HARNESS_VERIFY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "dpanm/inference.hpp"
#include "dpanm/kernel.hpp"
#include "dpanm/privacy.hpp"
#include "dpanm/random.hpp"
#include "dpanm/regression.hpp"
#include "dpanm/scores.hpp"

namespace dpanm::harness {

// ---------------------------------------------------------------------------
// Utility.

struct UtilityCheck {
  double gamma = 0.0;
  double sigma = 0.0;
  int scores = 2;  // 2 or 4 noisy scores
  double closed_form = 0.0;
  double monte_carlo = 0.0;
  double standard_error = 0.0;
  double gap = 0.0;
  bool pass = false;
};

// Fraction of draws in which the side with the smaller exact score stays
// smaller after independent Lap(0, sigma) noise on each score.
inline double simulate_correct_rate(double gamma, double sigma, int scores,
                                    std::size_t draws, NoiseStream& rng) {
  std::size_t correct = 0;
  for (std::size_t t = 0; t < draws; ++t) {
    double noise = laplace_sample(sigma, rng) - laplace_sample(sigma, rng);
    if (scores == 4) {
      noise += laplace_sample(sigma, rng) - laplace_sample(sigma, rng);
    }
    if (noise < gamma) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(draws);
}

// Every (gamma, sigma) pair for both the two- and four-score formulas. A cell
// passes when the Monte Carlo estimate is within three standard errors.
inline std::vector<UtilityCheck> verify_utility(
    const std::vector<double>& gammas, const std::vector<double>& sigmas,
    std::size_t draws, std::uint64_t seed) {
  if (draws < 1) throw DomainError("verify_utility: draws must be >= 1");
  std::vector<UtilityCheck> out;
  for (int scores : {2, 4}) {
    for (double gamma : gammas) {
      for (double sigma : sigmas) {
        UtilityCheck c;
        c.gamma = gamma;
        c.sigma = sigma;
        c.scores = scores;
        c.closed_form = scores == 2 ? utility_two_score(gamma, sigma)
                                    : utility_four_score(gamma, sigma);
        NoiseStream rng(derive_seed(seed, "utility", scores, gamma, sigma));
        c.monte_carlo = simulate_correct_rate(gamma, sigma, scores, draws, rng);
        c.standard_error = std::sqrt(c.closed_form * (1.0 - c.closed_form) /
                                     static_cast<double>(draws));
        c.gap = std::abs(c.monte_carlo - c.closed_form);
        c.pass = c.gap <= 3.0 * c.standard_error;
        out.push_back(c);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Test-set sensitivity.
//
// Each auditor holds a dataset (a, b) and evaluates the score with pair i
// replaced by (a', b') in O(m), reusing everything that does not involve i.
// The rank auditors agree bitwise with the full score functions and the HSIC
// auditor to round-off; the unit tests check both.

namespace detail {

// +1 if element i sorts after element j under the stable rank order.
inline int rank_sign(double vi, std::size_t i, double vj, std::size_t j) {
  if (vi < vj) return -1;
  if (vi > vj) return 1;
  return i < j ? -1 : 1;
}

}  // namespace detail

class KendallAuditor {
 public:
  KendallAuditor(std::span<const double> a, std::span<const double> b)
      : a_(a.begin(), a.end()), b_(b.begin(), b.end()) {
    const std::size_t m = a_.size();
    pairs_ = static_cast<std::int64_t>(m * (m - 1) / 2);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) s_ += product(i, j);
    }
  }

  double value() const { return finish(s_); }

  // Fixes the substituted index i and its new a-value; with_b() then
  // evaluates each candidate b-value.
  void prepare(std::size_t i, double a_new) {
    i_ = i;
    sa_.assign(a_.size(), 0);
    s_without_i_ = s_;
    for (std::size_t j = 0; j < a_.size(); ++j) {
      if (j == i) continue;
      s_without_i_ -= product(i, j);
      sa_[j] = detail::rank_sign(a_new, i, a_[j], j);
    }
  }

  double with_b(double b_new) const {
    std::int64_t s = s_without_i_;
    for (std::size_t j = 0; j < a_.size(); ++j) {
      if (j == i_) continue;
      s += sa_[j] * detail::rank_sign(b_new, i_, b_[j], j);
    }
    return finish(s);
  }

 private:
  int product(std::size_t i, std::size_t j) const {
    return detail::rank_sign(a_[i], i, a_[j], j) *
           detail::rank_sign(b_[i], i, b_[j], j);
  }
  double finish(std::int64_t s) const {
    return static_cast<double>(s < 0 ? -s : s) / static_cast<double>(pairs_);
  }

  std::vector<double> a_, b_;
  std::int64_t pairs_ = 0;
  std::int64_t s_ = 0;
  std::size_t i_ = 0;
  std::int64_t s_without_i_ = 0;
  std::vector<int> sa_;
};

class SpearmanAuditor {
 public:
  SpearmanAuditor(std::span<const double> a, std::span<const double> b)
      : a_(a.begin(), a.end()), b_(b.begin(), b.end()) {
    const RankVector ra = rank_vector(a_), rb = rank_vector(b_);
    for (std::size_t j = 0; j < a_.size(); ++j) {
      ra_.push_back(static_cast<std::int64_t>(ra[j]));
      rb_.push_back(static_cast<std::int64_t>(rb[j]));
    }
  }

  void prepare(std::size_t i, double a_new) {
    i_ = i;
    new_ra_ = shifted_ranks(a_, ra_, i, a_new);
  }

  double with_b(double b_new) const {
    const std::vector<std::int64_t> rb = shifted_ranks(b_, rb_, i_, b_new);
    std::uint64_t sum_d2 = 0;
    for (std::size_t j = 0; j < a_.size(); ++j) {
      const std::int64_t d = new_ra_[j] - rb[j];
      sum_d2 += static_cast<std::uint64_t>(d * d);
    }
    const double m = static_cast<double>(a_.size());
    return std::abs(1.0 - 6.0 * static_cast<double>(sum_d2) /
                              (m * (m * m - 1.0)));
  }

 private:
  // Ranks after replacing v[i] by v_new.
  static std::vector<std::int64_t> shifted_ranks(
      const std::vector<double>& v, const std::vector<std::int64_t>& rank,
      std::size_t i, double v_new) {
    std::vector<std::int64_t> out(v.size());
    std::int64_t below_new = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (j == i) continue;
      const bool old_below = detail::rank_sign(v[i], i, v[j], j) < 0;
      const bool new_below = detail::rank_sign(v_new, i, v[j], j) < 0;
      out[j] = rank[j] - (old_below ? 1 : 0) + (new_below ? 1 : 0);
      if (!new_below) ++below_new;
    }
    out[i] = below_new + 1;
    return out;
  }

  std::vector<double> a_, b_;
  std::vector<std::int64_t> ra_, rb_;
  std::size_t i_ = 0;
  std::vector<std::int64_t> new_ra_;
};

template <BoundedKernel Kernel = KernelSpec>
class HsicAuditor {
 public:
  HsicAuditor(std::span<const double> a, std::span<const double> b,
              Kernel kernel)
      : a_(a.begin(), a.end()), b_(b.begin(), b.end()), kernel_(kernel) {}

  // Caches the kernel sums that do not involve index i. O(m^2).
  void prepare_index(std::size_t i) {
    const std::size_t m = a_.size();
    i_ = i;
    rest_kl_ = 0.0;
    rest_k_.assign(m, 0.0);
    rest_l_.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      for (std::size_t l = 0; l < m; ++l) {
        if (l == i) continue;
        const double k = kernel_(a_[j], a_[l]);
        const double lv = kernel_(b_[j], b_[l]);
        rest_kl_ += k * lv;
        rest_k_[j] += k;
        rest_l_[j] += lv;
      }
    }
  }

  void prepare(double a_new) {
    k_new_.assign(a_.size(), 0.0);
    for (std::size_t j = 0; j < a_.size(); ++j) {
      if (j != i_) k_new_[j] = kernel_(a_new, a_[j]);
    }
    k_self_ = kernel_(a_new, a_new);
  }

  double with_b(double b_new) const {
    const std::size_t m = a_.size();
    double kl = 0.0, sum_k = 0.0, sum_l = 0.0;
    l_new_.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i_) continue;
      l_new_[j] = kernel_(b_new, b_[j]);
      kl += k_new_[j] * l_new_[j];
      sum_k += k_new_[j];
      sum_l += l_new_[j];
    }
    const double l_self = kernel_(b_new, b_new);
    const double row_k_i = sum_k + k_self_, row_l_i = sum_l + l_self;
    double cross = row_k_i * row_l_i, total_k = row_k_i, total_l = row_l_i;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i_) continue;
      const double rk = rest_k_[j] + k_new_[j];
      const double rl = rest_l_[j] + l_new_[j];
      cross += rk * rl;
      total_k += rk;
      total_l += rl;
    }
    const double sum_kl = rest_kl_ + 2.0 * kl + k_self_ * l_self;
    const double md = static_cast<double>(m);
    const double trace =
        sum_kl - 2.0 * cross / md + total_k * total_l / (md * md);
    double value = trace / ((md - 1.0) * (md - 1.0));
    if (value < 0.0 && value >= -kHsicClampTolerance) value = 0.0;
    return value;
  }

 private:
  std::vector<double> a_, b_;
  Kernel kernel_;
  std::size_t i_ = 0;
  double rest_kl_ = 0.0;
  std::vector<double> rest_k_, rest_l_;
  std::vector<double> k_new_;
  mutable std::vector<double> l_new_;
  double k_self_ = 1.0;
};

// Relative slack for comparing an empirical maximum with its bound.
inline constexpr double kAuditTolerance = 1e-12;

struct SensitivityAuditRow {
  std::string score;
  std::size_t m = 0;
  std::size_t n = 0;      // residual audit only
  double lambda = 0.0;    // residual audit only
  std::size_t instances = 0;
  std::size_t evaluations = 0;
  double empirical_max = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  bool pass = false;
};

namespace detail {

// Replacement values for one coordinate: `points` evenly spaced values in
// [-1, 1] plus every value already present, so ties are exercised.
inline std::vector<double> replacement_grid(std::span<const double> v,
                                            std::size_t points) {
  std::vector<double> g(v.begin(), v.end());
  for (std::size_t p = 0; p < points; ++p) {
    g.push_back(points == 1 ? 0.0
                            : -1.0 + 2.0 * static_cast<double>(p) /
                                         static_cast<double>(points - 1));
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

// Odd-numbered instances are rounded to multiples of 1/4 so that they carry
// many ties.
inline void audit_instance(std::size_t m, std::size_t instance,
                           NoiseStream& rng, std::vector<double>& a,
                           std::vector<double>& b) {
  a.resize(m);
  b.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    a[j] = rng.uniform(-1.0, 1.0);
    b[j] = std::clamp(a[j] * a[j] * a[j] + 0.5 * rng.uniform(-1.0, 1.0), -1.0,
                      1.0);
    if (instance % 2 == 1) {
      a[j] = std::round(a[j] * 4.0) / 4.0;
      b[j] = std::round(b[j] * 4.0) / 4.0;
    }
  }
}

template <typename Auditor, typename PrepareA>
void audit_all_substitutions(Auditor& auditor, std::span<const double> a,
                             std::span<const double> b, double base,
                             std::size_t points, PrepareA prepare_a,
                             double& worst, std::size_t& evaluations) {
  const std::vector<double> ga = replacement_grid(a, points);
  const std::vector<double> gb = replacement_grid(b, points);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (double an : ga) {
      prepare_a(auditor, i, an);
      for (double bn : gb) {
        worst = std::max(worst, std::abs(auditor.with_b(bn) - base));
        ++evaluations;
      }
    }
  }
}

}  // namespace detail

// Largest single-substitution change of each score over `instances` random
// datasets per m, compared with test_sensitivity(kind, m). HSIC uses a fixed
// bandwidth.
inline std::vector<SensitivityAuditRow> verify_test_sensitivity(
    const std::vector<std::size_t>& ms, std::size_t instances,
    std::size_t grid_points, std::uint64_t seed, double bandwidth = 0.5) {
  std::vector<SensitivityAuditRow> out;
  const KernelSpec kernel(bandwidth);
  for (ScoreKind kind :
       {ScoreKind::kSpearmanRho, ScoreKind::kKendallTau, ScoreKind::kHsic}) {
    for (std::size_t m : ms) {
      if (m < 2) throw DomainError("verify_test_sensitivity: m must be >= 2");
      SensitivityAuditRow row;
      row.score = std::string(to_string(kind));
      row.m = m;
      row.instances = instances;
      row.bound = test_sensitivity(kind, m).value;
      std::vector<double> a, b;
      for (std::size_t t = 0; t < instances; ++t) {
        NoiseStream rng(derive_seed(seed, "sensitivity", m, t));
        detail::audit_instance(m, t, rng, a, b);
        const double base = compute_score(kind, a, b, kernel).value;
        if (kind == ScoreKind::kKendallTau) {
          KendallAuditor aud(a, b);
          detail::audit_all_substitutions(
              aud, a, b, base, grid_points,
              [](KendallAuditor& x, std::size_t i, double an) {
                x.prepare(i, an);
              },
              row.empirical_max, row.evaluations);
        } else if (kind == ScoreKind::kSpearmanRho) {
          SpearmanAuditor aud(a, b);
          detail::audit_all_substitutions(
              aud, a, b, base, grid_points,
              [](SpearmanAuditor& x, std::size_t i, double an) {
                x.prepare(i, an);
              },
              row.empirical_max, row.evaluations);
        } else {
          HsicAuditor<> aud(a, b, kernel);
          std::size_t current = a.size();
          detail::audit_all_substitutions(
              aud, a, b, base, grid_points,
              [&current](HsicAuditor<>& x, std::size_t i, double an) {
                if (i != current) {
                  x.prepare_index(i);
                  current = i;
                }
                x.prepare(an);
              },
              row.empirical_max, row.evaluations);
        }
      }
      row.ratio = row.empirical_max / row.bound;
      // The Kendall bound is attained exactly; allow round-off only.
      row.pass = row.ratio <= 1.0 + kAuditTolerance;
      out.push_back(row);
    }
  }
  return out;
}

// Largest change of any test residual when one training pair is replaced,
// compared with residual_perturbation_bound(n, lambda). Per instance the
// substituted index is the one with the largest dual coefficient, and the
// replacements are the four corners of [-1, 1]^2, the origin and the
// reflected original pair.
inline std::vector<SensitivityAuditRow> verify_residual_bound(
    const std::vector<std::size_t>& ns, const std::vector<std::size_t>& ms,
    const std::vector<double>& lambdas, std::size_t instances,
    std::uint64_t seed, double bandwidth = 0.5) {
  std::vector<SensitivityAuditRow> out;
  const KernelSpec kernel(bandwidth);
  for (std::size_t n : ns) {
    for (std::size_t m : ms) {
      for (double lambda : lambdas) {
        SensitivityAuditRow row;
        row.score = "residual";
        row.n = n;
        row.m = m;
        row.lambda = lambda;
        row.instances = instances;
        row.bound = residual_perturbation_bound(n, lambda);
        for (std::size_t t = 0; t < instances; ++t) {
          NoiseStream rng(derive_seed(seed, "residual", n, m, lambda, t));
          std::vector<double> x(n), y(n), xt(m);
          for (std::size_t j = 0; j < n; ++j) {
            x[j] = rng.uniform(-1.0, 1.0);
            y[j] = t % 2 == 0 ? rng.uniform(-1.0, 1.0)
                              : std::clamp(std::sin(3.0 * x[j]) +
                                               0.2 * rng.uniform(-1.0, 1.0),
                                           -1.0, 1.0);
          }
          for (double& v : xt) v = rng.uniform(-1.0, 1.0);
          const auto base = fit_krr(x, y, kernel, lambda);
          const auto base_pred = base.predict(xt);
          const auto& alpha = base.dual_coefficients();
          const auto i = static_cast<std::size_t>(
              std::max_element(alpha.begin(), alpha.end(),
                               [](double p, double q) {
                                 return std::abs(p) < std::abs(q);
                               }) -
              alpha.begin());
          const double candidates[][2] = {{-1, -1}, {-1, 1}, {1, -1}, {1, 1},
                                          {0, 0},   {-x[i], -y[i]}};
          for (const auto& c : candidates) {
            auto x2 = x;
            auto y2 = y;
            x2[i] = c[0];
            y2[i] = c[1];
            const auto pred = fit_krr(x2, y2, kernel, lambda).predict(xt);
            // A test residual y' - f(x') moves exactly as f(x') does.
            for (std::size_t j = 0; j < m; ++j) {
              row.empirical_max =
                  std::max(row.empirical_max, std::abs(pred[j] - base_pred[j]));
            }
            ++row.evaluations;
          }
        }
        row.ratio = row.empirical_max / row.bound;
        row.pass = row.ratio <= 1.0 + kAuditTolerance;
        out.push_back(row);
      }
    }
  }
  return out;
}

}  // namespace dpanm::harness

#endif  // DPANM_HARNESS_VERIFY_HPP_
