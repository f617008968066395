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

#include "dpanm/privacy/ptr.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dpanm/inference.hpp"
#include "dpanm/random.hpp"
#include "oracles.hpp"

namespace dpanm {
namespace {

using Vec = std::vector<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();

Vec random_data(NoiseStream& rng, std::size_t m, bool ties) {
  Vec v(m);
  for (double& e : v) {
    e = rng.uniform(0.0, 10.0);
    if (ties) e = std::round(e / 2.0) * 2.0;
  }
  return v;
}

TEST(IqrBinsTest, UnitWidthAndHalfShifted) {
  for (double q : {-3.7, -0.5, 0.0, 0.2, 0.5, 0.74, 2.0, 5.49}) {
    const auto bins = iqr_bins(q);
    for (const auto& b : bins) {
      EXPECT_DOUBLE_EQ(b.hi - b.lo, 1.0);
      EXPECT_TRUE(b.contains(q)) << q;
    }
    EXPECT_DOUBLE_EQ(bins[0].lo, std::floor(q));
    EXPECT_DOUBLE_EQ(bins[1].lo, std::floor(q + 0.5) - 0.5);
    // Some bin has q at least 1/4 away from both of its edges.
    double best = 0.0;
    for (const auto& b : bins) {
      best = std::max(best, std::min(q - b.lo, b.hi - q));
    }
    EXPECT_GE(best, 0.25 - 1e-12);
  }
}

TEST(IqrAttackCountTest, UnboundedIntervalIsSentinel) {
  const Vec v{1, 2, 3, 4, 5};
  EXPECT_EQ(iqr_attack_count(v, {-kInf, kInf}), 6u);
}

TEST(IqrAttackCountTest, OutsideIntervalIsZero) {
  const Vec v{1, 2, 3, 4, 5};
  EXPECT_EQ(iqr_attack_count(v, {1.0, 2.0}), 0u);
}

TEST(IqrAttackCountTest, TightUpperEdge) {
  const Vec v{1, 2, 3, 4, 5};
  const LogInterval interval{-kInf, std::log(2.0) + 1e-6};
  const auto fast = iqr_attack_count(v, interval);
  const auto brute = testing::iqr_attack_bruteforce(
      v, interval.lo, interval.hi, testing::substitution_grid(v), 3);
  ASSERT_TRUE(brute.has_value());
  EXPECT_EQ(fast, *brute);
  EXPECT_EQ(fast, 1u);
}

TEST(IqrAttackCountTest, Errors) {
  EXPECT_THROW(iqr_attack_count(Vec{1, 2, 3}, {0, 1}), DomainError);
  EXPECT_THROW(iqr_attack_count(Vec{2, 2, 2, 2, 2}, {0, 1}),
               DegenerateDataError);
}

// Exhaustive substitution oracle on small samples.
TEST(IqrAttackCountTest, MatchesExhaustiveSearch) {
  NoiseStream rng(11);
  int checked = 0;
  for (int t = 0; t < 400; ++t) {
    const std::size_t m = 4 + rng.below(t < 300 ? 5 : 9);  // 4..8, then ..12
    const std::size_t max_k = m <= 8 ? 3 : 2;
    const Vec v = random_data(rng, m, t % 4 == 1);
    const double iqr = testing::iqr_oracle(v);
    if (!(iqr > 0.0)) continue;
    const double q = std::log(iqr);
    LogInterval interval;
    switch (t % 3) {
      case 0:
        interval = {q - rng.uniform(0.0, 1.5), q + rng.uniform(1e-9, 1.5)};
        break;
      case 1:
        interval = iqr_bins(q)[rng.below(2)];
        break;
      default:
        interval = rng.below(2) ? LogInterval{-kInf, q + rng.uniform(0.01, 1)}
                                : LogInterval{q - rng.uniform(0.0, 1), kInf};
    }
    const auto fast = iqr_attack_count(v, interval);
    const auto brute = testing::iqr_attack_bruteforce(
        v, interval.lo, interval.hi, testing::substitution_grid(v), max_k);
    if (fast <= max_k) {
      ASSERT_TRUE(brute.has_value()) << "t=" << t << " fast=" << fast;
      ASSERT_EQ(fast, *brute) << "t=" << t;
    } else {
      ASSERT_FALSE(brute.has_value()) << "t=" << t << " brute=" << *brute;
    }
    ++checked;
  }
  EXPECT_GT(checked, 350);
}

TEST(IqrReachTest, ExtremesAreMonotoneInK) {
  NoiseStream rng(12);
  for (int t = 0; t < 50; ++t) {
    Vec v = random_data(rng, 5 + rng.below(40), t % 2 == 0);
    std::sort(v.begin(), v.end());
    const detail::IqrReach reach(v);
    double prev_max = reach.max_iqr(0), prev_min = reach.min_iqr(0);
    EXPECT_DOUBLE_EQ(prev_max, testing::iqr_oracle(v));
    EXPECT_DOUBLE_EQ(prev_min, testing::iqr_oracle(v));
    for (std::size_t k = 1; k <= v.size(); ++k) {
      const double mx = reach.max_iqr(k), mn = reach.min_iqr(k);
      EXPECT_GE(mx, prev_max);
      EXPECT_LE(mn, prev_min);
      prev_max = mx;
      prev_min = mn;
    }
  }
}

TEST(TrainIqrAttackCountTest, Formula) {
  const LogInterval interval{std::log(0.5), std::log(2.0)};
  // Exact boundary hits round down: 25 shifts reach 0.5, which is inside.
  EXPECT_EQ(train_iqr_attack_count(1.0, interval, 0.01), 25u);
  EXPECT_EQ(train_iqr_attack_count(1.0, interval, 0.0099), 26u);
  EXPECT_EQ(train_iqr_attack_count(1.9, interval, 0.01), 5u);
  EXPECT_EQ(train_iqr_attack_count(3.0, interval, 0.01), 0u);
  EXPECT_EQ(train_iqr_attack_count(1.0, {-kInf, kInf}, 0.01),
            kMaxStabilityDistance);
  EXPECT_THROW(train_iqr_attack_count(0.0, interval, 0.01),
               DegenerateDataError);
}

TEST(TrainIqrAttackCountTest, FewerShiftsStayInside) {
  NoiseStream rng(13);
  for (int t = 0; t < 200; ++t) {
    const double iqr = rng.uniform(0.05, 3.0);
    const double shift = rng.uniform(1e-4, 0.05);
    const LogInterval b = iqr_bins(std::log(iqr))[rng.below(2)];
    const auto count = train_iqr_attack_count(iqr, b, shift);
    ASSERT_GE(count, 1u);
    const double reach = 2.0 * static_cast<double>(count - 1) * shift;
    const double lo = std::exp(b.lo), hi = std::exp(b.hi);
    EXPECT_GE(iqr - reach, lo * (1.0 - 1e-12));
    EXPECT_LT(iqr + reach, hi * (1.0 + 1e-12));
    // One more substitution could leave.
    const double more = 2.0 * static_cast<double>(count) * shift;
    EXPECT_TRUE(iqr - more < lo * (1.0 + 1e-12) ||
                iqr + more >= hi * (1.0 - 1e-12));
  }
}

TEST(PrivateLogIqrTest, DegenerateIsBottomAndConsumesFixedDraws) {
  NoiseStream rng(14);
  const auto trace =
      private_log_iqr_trace(Vec{1, 5, 5, 5, 5, 5, 9}, {1.0, 0.01, 0}, rng);
  EXPECT_TRUE(trace.outcome.is_bottom());
  EXPECT_FALSE(trace.log_iqr.has_value());
  EXPECT_EQ(rng.draws(), 3u);
}

TEST(PrivateLogIqrTest, ReplayMatchesLaplaceDraws) {
  NoiseStream data_rng(15);
  Vec v(2000);
  for (double& e : v) e = data_rng.normal();
  const PrivacyParams p{1.0, 0.01, 0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    NoiseStream rng(seed), replay(seed);
    const auto trace = private_log_iqr_trace(v, p, rng);
    const double z1 = laplace_sample(1.0, replay);
    const double z2 = laplace_sample(1.0, replay);
    const double z3 = laplace_sample(1.0, replay);
    EXPECT_EQ(trace.noise[0], z1);
    EXPECT_EQ(trace.noise[1], z2);
    EXPECT_EQ(trace.noise[2], z3);
    ASSERT_TRUE(trace.outcome.is_released());
    EXPECT_EQ(trace.outcome.value(), log_iqr(v) + z3);
  }
}

TEST(PrivateLogIqrTest, SmallCountsRarelyRelease) {
  // With m = 4 a single point can push a quartile anywhere, so A_1 = A_2 = 1.
  const Vec v{0.1, 0.4, 0.5, 0.9};
  for (const auto& b : iqr_bins(log_iqr(v))) {
    EXPECT_EQ(iqr_attack_count(v, b), 1u);
  }
  const PrivacyParams p{1.0, 0.01, 0};
  NoiseStream rng(16);
  const int n = 100000;
  int released = 0;
  for (int i = 0; i < n; ++i) released += private_log_iqr(v, p, rng).is_released();
  const double rate = static_cast<double>(released) / n;
  const double bound = iqr_release_failure_bound(0.01);
  EXPECT_LE(rate, bound + 3.0 * std::sqrt(bound * (1 - bound) / n));
}

TEST(PrivateLogIqrTest, WideMarginAlmostAlwaysReleases) {
  NoiseStream data_rng(17);
  Vec v(2000);
  for (double& e : v) e = data_rng.normal();
  const auto bins = iqr_bins(log_iqr(v));
  EXPECT_GE(std::max(iqr_attack_count(v, bins[0]),
                     iqr_attack_count(v, bins[1])),
            50u);
  const PrivacyParams p{1.0, 0.01, 0};
  NoiseStream rng(18);
  const int n = 20000;
  int released = 0, far = 0;
  const double q = log_iqr(v);
  for (int i = 0; i < n; ++i) {
    const auto out = private_log_iqr(v, p, rng);
    if (out.is_released()) {
      ++released;
      far += std::abs(out.value() - q) > 1.0;
    }
  }
  EXPECT_GE(static_cast<double>(released) / n, 1.0 - 0.01);
  const double p_far = std::exp(-1.0);
  EXPECT_NEAR(static_cast<double>(far) / released, p_far,
              3.0 * std::sqrt(p_far * (1 - p_far) / released));
}

TEST(PrivateLogIqrTest, RequiresPositiveDelta) {
  NoiseStream rng(19);
  EXPECT_THROW(private_log_iqr(Vec{1, 2, 3, 4}, {1.0, 0.0, 0}, rng),
               UnsupportedError);
  EXPECT_THROW(private_log_iqr(Vec{1, 2, 3}, {1.0, 0.1, 0}, rng),
               DomainError);
}

TEST(PrivateLogIqrTrainTest, ReleasesWhenResidualsAreStable) {
  NoiseStream data_rng(20);
  Vec r(200);
  for (double& e : r) e = 0.3 * data_rng.normal();
  NoiseStream rng(21);
  // n = 10^6 and lambda = 1 make each substitution move residuals by 8e-6.
  const auto trace =
      private_log_iqr_train_trace(r, 1000000, 1.0, {1.0, 0.01, 0}, rng);
  EXPECT_TRUE(trace.outcome.is_released());
  EXPECT_GE(std::max(trace.attack_counts[0], trace.attack_counts[1]), 1000u);
  // Tiny n: no stability at all.
  NoiseStream rng2(22);
  const auto weak = private_log_iqr_train_trace(r, 10, 0.1, {1.0, 0.01, 0}, rng2);
  EXPECT_LE(std::max(weak.attack_counts[0], weak.attack_counts[1]), 1u);
}

}  // namespace
}  // namespace dpanm
