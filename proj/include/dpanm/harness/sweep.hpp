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

// Experiment grid: datasets x scores x epsilons x lambdas x trials.
//
// A trial is one train/test split (index s) and one noise draw (index d).
// Seeds never depend on execution order:
//   synthetic data  derive_seed(master, "data", shape, s)
//   split           derive_seed(master, "split", dataset, s)
//   noise           derive_seed(master, "noise", dataset, score, e, l, s, d)
// where e and l index the epsilon and lambda grids. Splits are shared by all
// cells so that cells differ only in the quantity being varied.

#ifndef DPANM_HARNESS_SWEEP_HPP_
#define DPANM_HARNESS_SWEEP_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dpanm/data_io.hpp"
#include "dpanm/harness/report.hpp"
#include "dpanm/inference.hpp"
#include "dpanm/kernel.hpp"
#include "dpanm/random.hpp"
#include "dpanm/scores.hpp"

namespace dpanm::harness {

struct SyntheticSpec {
  SynthShape shape = SynthShape::kCubic;
  std::size_t n_total = 500;
  double noise = 0.3;
};

struct ExperimentConfig {
  // Loaded pairs (normalized by the sweep). Ignored when `synthetic` is set.
  std::vector<SamplePairs> datasets;
  std::optional<SyntheticSpec> synthetic;
  std::vector<ScoreKind> scores{ScoreKind::kHsic};
  // Empty means non-private.
  std::vector<double> epsilons;
  std::vector<double> lambdas{1e-3};
  double delta = 0.01;
  double delta_prime = 1e-6;
  Target target = Target::kTest;
  HsicBound hsic_bound = HsicBound::kImproved;
  double bandwidth = 0.5;
  double test_fraction = 0.5;
  std::size_t splits = 10;
  std::size_t draws = 1;
  std::uint64_t seed = 0;
  // 0 picks std::thread::hardware_concurrency().
  unsigned threads = 1;

  bool private_mode() const { return !epsilons.empty(); }
  std::size_t trials() const { return splits * draws; }

  void validate() const {
    if (!synthetic && datasets.empty()) {
      throw DomainError("config: no datasets");
    }
    if (scores.empty() || lambdas.empty()) {
      throw DomainError("config: score and lambda grids must be nonempty");
    }
    if (splits < 1 || draws < 1) throw DomainError("config: trials must be >= 1");
    if (!private_mode() && draws != 1) {
      throw DomainError("config: noise draws require a private run");
    }
    for (double l : lambdas) dpanm::detail::require_unit_lambda(l, "config");
    for (double e : epsilons) PrivacyParams{e, delta, 0}.validate();
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
      throw DomainError("config: bandwidth must be positive");
    }
    if (private_mode()) {
      for (ScoreKind k : scores) {
        if (k == ScoreKind::kVariance) {
          throw UnsupportedError("config: variance has no private variant");
        }
        if (target == Target::kBoth && k != ScoreKind::kHsic) {
          throw UnsupportedError(
              "config: target 'both' is supported for hsic only");
        }
        if (k == ScoreKind::kIqr && target == Target::kTest) {
          for (double e : epsilons) advanced_composition_budget(e, delta_prime);
        }
      }
      if (!(delta > 0.0)) {
        for (ScoreKind k : scores) {
          if (k == ScoreKind::kIqr ||
              (is_rank_score(k) && target == Target::kTrain)) {
            throw UnsupportedError("config: delta must be > 0 for '" +
                                   std::string(to_string(k)) + "'");
          }
        }
      }
    }
  }

  std::size_t dataset_count() const {
    return synthetic ? 1 : datasets.size();
  }

  std::string dataset_id(std::size_t d) const {
    return synthetic ? std::string(to_string(synthetic->shape))
                     : datasets[d].id;
  }
};

namespace detail {

struct Grid {
  std::size_t datasets, scores, epsilons, lambdas, trials;

  std::size_t cell(std::size_t d, std::size_t k, std::size_t e,
                   std::size_t l) const {
    return ((d * scores + k) * epsilons + e) * lambdas + l;
  }
  std::size_t cells() const { return datasets * scores * epsilons * lambdas; }
};

inline SamplePairs sweep_dataset(const ExperimentConfig& config, std::size_t d,
                                 std::size_t s) {
  if (config.synthetic) {
    const auto& spec = *config.synthetic;
    return synth_anm(spec.shape, spec.n_total, spec.noise,
                     derive_seed(config.seed, "data",
                                 std::string(to_string(spec.shape)), s));
  }
  return normalize(config.datasets[d]);
}

inline ResultRow error_row(ResultRow row) {
  row.decision = "error";
  row.abstained = 0.0;
  return row;
}

// Mean over the values that are present and finite; nullopt if none are.
template <typename Get>
std::optional<double> mean_of(const std::vector<ResultRow>& rows,
                              std::size_t begin, std::size_t end, Get get) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const std::optional<double> v = get(rows[i]);
    if (v && std::isfinite(*v)) {
      sum += *v;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

inline ResultRow aggregate_row(const std::vector<ResultRow>& rows,
                               std::size_t begin, std::size_t end) {
  ResultRow agg = rows[begin];
  agg.aggregate = true;
  agg.decision = "mean";
  agg.seed = end - begin;
  std::size_t correct = 0, abstained = 0;
  for (std::size_t i = begin; i < end; ++i) {
    if (rows[i].abstained != 0.0) ++abstained;
    if (rows[i].correct && *rows[i].correct != 0.0) ++correct;
  }
  const bool has_truth =
      std::any_of(rows.begin() + begin, rows.begin() + end,
                  [](const ResultRow& r) { return r.truth_known; });
  const double denom = static_cast<double>(end - begin);
  agg.correct = has_truth ? std::optional<double>(correct / denom)
                          : std::nullopt;
  agg.abstained = abstained / denom;
  agg.margin = mean_of(rows, begin, end, [](const ResultRow& r) {
                 return std::optional<double>(r.margin);
               }).value_or(std::nan(""));
  agg.sigma = mean_of(rows, begin, end,
                      [](const ResultRow& r) { return r.sigma; });
  agg.predicted_utility = mean_of(
      rows, begin, end, [](const ResultRow& r) { return r.predicted_utility; });
  return agg;
}

}  // namespace detail

// Runs the full grid. Output order is by cell (dataset, score, epsilon,
// lambda), each cell's trials in (split, draw) order followed by its
// aggregate row, independent of the thread count.
inline std::vector<ResultRow> run_sweep(const ExperimentConfig& config) {
  config.validate();
  const detail::Grid grid{config.dataset_count(), config.scores.size(),
                          std::max<std::size_t>(config.epsilons.size(), 1),
                          config.lambdas.size(), config.trials()};
  std::vector<ResultRow> trials(grid.cells() * grid.trials);
  const KernelSpec kernel(config.bandwidth);

  // Work unit: one (dataset, split, lambda); it fits once and fills every
  // score / epsilon / draw row that depends on that fit.
  const std::size_t units =
      grid.datasets * config.splits * grid.lambdas;
  auto run_unit = [&](std::size_t u) {
    const std::size_t l = u % grid.lambdas;
    const std::size_t s = (u / grid.lambdas) % config.splits;
    const std::size_t d = u / (grid.lambdas * config.splits);
    const std::string id = config.dataset_id(d);
    const double lambda = config.lambdas[l];

    auto base_row = [&](std::size_t k, std::size_t e) {
      ResultRow row;
      row.dataset = id;
      row.score = std::string(to_string(config.scores[k]));
      if (config.private_mode()) row.epsilon = config.epsilons[e];
      row.lambda = lambda;
      return row;
    };
    auto slot = [&](std::size_t k, std::size_t e, std::size_t draw) -> auto& {
      return trials[grid.cell(d, k, e, l) * grid.trials + s * config.draws +
                    draw];
    };

    std::optional<AnmFit> fit;
    Direction truth = Direction::kUnknown;
    std::uint64_t split_seed = 0;
    try {
      const SamplePairs data = detail::sweep_dataset(config, d, s);
      truth = data.ground_truth;
      split_seed = derive_seed(config.seed, "split", id, s);
      fit = anm_fit(split(data, config.test_fraction, split_seed), kernel,
                    lambda);
    } catch (const std::exception&) {
      fit.reset();
    }

    for (std::size_t k = 0; k < grid.scores; ++k) {
      const ScoreKind kind = config.scores[k];
      for (std::size_t e = 0; e < grid.epsilons; ++e) {
        for (std::size_t draw = 0; draw < config.draws; ++draw) {
          ResultRow row = base_row(k, e);
          row.truth_known = truth != Direction::kUnknown;
          auto& out = slot(k, e, draw);
          if (!fit) {
            out = detail::error_row(std::move(row));
            continue;
          }
          try {
            if (!config.private_mode()) {
              const InferenceReport rep = score_fit(*fit, kind, kernel);
              row.seed = split_seed;
              row.decision = std::string(to_string(rep.decision));
              row.margin = rep.margin;
              if (auto c = is_correct(rep.decision, truth)) row.correct = *c;
              row.abstained = 0.0;
            } else {
              const std::uint64_t noise_seed =
                  derive_seed(config.seed, "noise", id, row.score, e, l, s,
                              draw);
              NoiseStream rng(noise_seed);
              const PrivateConfig pc{
                  PrivacyParams{config.epsilons[e], config.delta, noise_seed},
                  config.target, config.delta_prime, config.hsic_bound};
              const PrivateInferenceReport rep =
                  private_infer(*fit, kind, kernel, pc, rng);
              row.seed = noise_seed;
              row.decision = std::string(to_string(rep.decision));
              row.margin = rep.margin;
              row.abstained = rep.decision == Decision::kAbstain ? 1.0 : 0.0;
              if (auto c = is_correct(rep.decision, truth)) row.correct = *c;
              row.sigma = rep.noise_scale;
              row.predicted_utility = rep.predicted_utility;
            }
            out = std::move(row);
          } catch (const std::exception&) {
            out = detail::error_row(std::move(row));
          }
        }
      }
    }
  };

  unsigned threads = config.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, std::max<std::size_t>(units, 1)));
  if (threads <= 1) {
    for (std::size_t u = 0; u < units; ++u) run_unit(u);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t u; (u = next.fetch_add(1)) < units;) run_unit(u);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<ResultRow> rows;
  rows.reserve(trials.size() + grid.cells());
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    const std::size_t begin = c * grid.trials, end = begin + grid.trials;
    rows.insert(rows.end(), trials.begin() + begin, trials.begin() + end);
    rows.push_back(detail::aggregate_row(trials, begin, end));
  }
  return rows;
}

}  // namespace dpanm::harness

#endif  // DPANM_HARNESS_SWEEP_HPP_
