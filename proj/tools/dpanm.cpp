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

// dpanm: causal direction of a variable pair, optionally under differential
// privacy, plus experiment sweeps and bound verification.
//
// Exit status: 0 on success, 1 on error or failed verification, 2 when the
// private decision (or every trial of a sweep) abstained.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpanm/dpanm.hpp"
#include "dpanm/harness/report.hpp"
#include "dpanm/harness/sweep.hpp"
#include "dpanm/harness/verify.hpp"
#include "json.hpp"

namespace {

using dpanm::harness::format_number;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAbstain = 2;

struct Options {
  std::vector<std::string> scores{"hsic"};
  std::vector<double> epsilons;
  std::vector<double> lambdas{1e-3};
  double delta = 0.01;
  double delta_prime = 1e-6;
  std::string target = "test";
  std::size_t trials = 10;
  std::size_t draws = 1;
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::string out;
  std::string pairs_dir;
  std::string pairs_file;
  std::string synthetic;
  std::size_t n_total = 500;
  double noise = 0.3;
  std::string hsic_bound = "improved";
  double bandwidth = 0.5;
  double test_fraction = 0.5;
  unsigned threads = 1;
};

void add_experiment_flags(CLI::App* cmd, Options& o, bool grids) {
  if (grids) {
    cmd->add_option("--score", o.scores, "Score kinds (comma separated)")
        ->delimiter(',');
    cmd->add_option("--epsilon", o.epsilons,
                    "Privacy levels; omit for a non-private run")
        ->delimiter(',');
    cmd->add_option("--lambda", o.lambdas, "Ridge regularization grid")
        ->delimiter(',');
  } else {
    cmd->add_option("--score", o.scores, "Score kind")->expected(1);
    cmd->add_option("--epsilon", o.epsilons,
                    "Privacy level; omit for a non-private run")
        ->expected(1);
    cmd->add_option("--lambda", o.lambdas, "Ridge regularization")
        ->expected(1);
  }
  cmd->add_option("--delta", o.delta, "PTR failure probability");
  cmd->add_option("--delta-prime", o.delta_prime,
                  "Advanced-composition slack (test-private IQR)");
  cmd->add_option("--target", o.target, "Protected data: test, train or both")
      ->check(CLI::IsMember({"test", "train", "both"}));
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--pairs-dir", o.pairs_dir, "Directory of pairs files");
  cmd->add_option("--synthetic", o.synthetic,
                  "Synthetic model: cubic, sigmoid or linear-gaussian")
      ->check(CLI::IsMember({"cubic", "sigmoid", "linear-gaussian"}));
  cmd->add_option("--n-total", o.n_total, "Synthetic sample size");
  cmd->add_option("--noise", o.noise, "Synthetic noise level");
  cmd->add_option("--hsic-bound", o.hsic_bound,
                  "HSIC test sensitivity: loose or improved")
      ->check(CLI::IsMember({"loose", "improved"}));
  cmd->add_option("--bandwidth", o.bandwidth, "Kernel bandwidth (fixed)");
  cmd->add_option("--test-fraction", o.test_fraction,
                  "Share of samples held out for testing");
  if (grids) {
    cmd->add_option("--format", o.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
  } else {
    cmd->add_option("--format", o.format, "Output format: text or json")
        ->check(CLI::IsMember({"text", "json"}));
  }
  cmd->add_option("--out", o.out, "Output file (default stdout)");
}

dpanm::harness::ExperimentConfig make_config(const Options& o) {
  dpanm::harness::ExperimentConfig c;
  c.scores.clear();
  for (const auto& s : o.scores) c.scores.push_back(dpanm::parse_score_kind(s));
  c.epsilons = o.epsilons;
  c.lambdas = o.lambdas;
  c.delta = o.delta;
  c.delta_prime = o.delta_prime;
  c.target = dpanm::parse_target(o.target);
  c.hsic_bound = o.hsic_bound == "loose" ? dpanm::HsicBound::kLoose
                                         : dpanm::HsicBound::kImproved;
  c.bandwidth = o.bandwidth;
  c.test_fraction = o.test_fraction;
  c.splits = o.trials;
  c.draws = o.draws;
  c.seed = o.seed;
  c.threads = o.threads;
  const int sources = !o.synthetic.empty() + !o.pairs_dir.empty() +
                      !o.pairs_file.empty();
  if (sources != 1) {
    throw dpanm::DomainError(
        "exactly one of --synthetic, --pairs-dir or --pairs is required");
  }
  if (!o.synthetic.empty()) {
    c.synthetic = dpanm::harness::SyntheticSpec{
        dpanm::parse_synth_shape(o.synthetic), o.n_total, o.noise};
  } else if (!o.pairs_dir.empty()) {
    c.datasets = dpanm::load_pairs_dir(o.pairs_dir);
    if (c.datasets.empty()) {
      throw dpanm::DomainError(o.pairs_dir + ": no pairs files");
    }
  } else {
    c.datasets.push_back(dpanm::load_pairs_file(o.pairs_file));
  }
  return c;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open for writing");
  f << text;
}

int cmd_infer(const Options& o) {
  Options single = o;
  single.trials = 1;
  single.draws = 1;
  dpanm::harness::ExperimentConfig config = make_config(single);
  if (config.dataset_count() != 1) {
    throw dpanm::DomainError("infer needs a single dataset");
  }
  config.validate();
  const dpanm::ScoreKind kind = config.scores.front();
  const double lambda = config.lambdas.front();
  const std::string id = config.dataset_id(0);
  const dpanm::SamplePairs data =
      dpanm::harness::detail::sweep_dataset(config, 0, 0);
  const std::uint64_t split_seed =
      dpanm::derive_seed(config.seed, "split", id, 0);
  const dpanm::KernelSpec kernel(config.bandwidth);
  const dpanm::AnmFit fit =
      dpanm::anm_fit(dpanm::split(data, config.test_fraction, split_seed),
                     kernel, lambda);

  nlohmann::ordered_json j;
  j["dataset"] = id;
  j["score"] = std::string(dpanm::to_string(kind));
  j["lambda"] = lambda;
  j["n"] = fit.n;
  j["m"] = fit.m();
  int status = kExitOk;
  if (!config.private_mode()) {
    const dpanm::InferenceReport rep = dpanm::score_fit(fit, kind, kernel);
    j["s_xy"] = rep.s_xy;
    j["s_yx"] = rep.s_yx;
    j["margin"] = rep.margin;
    j["decision"] = std::string(dpanm::to_string(rep.decision));
  } else {
    const double eps = config.epsilons.front();
    const std::uint64_t noise_seed = dpanm::derive_seed(
        config.seed, "noise", id, std::string(dpanm::to_string(kind)), 0, 0,
        0, 0);
    dpanm::NoiseStream rng(noise_seed);
    const dpanm::PrivateConfig pc{
        dpanm::PrivacyParams{eps, config.delta, noise_seed}, config.target,
        config.delta_prime, config.hsic_bound};
    const dpanm::PrivateInferenceReport rep =
        dpanm::private_infer(fit, kind, kernel, pc, rng);
    j["target"] = std::string(dpanm::to_string(rep.target));
    j["epsilon"] = eps;
    j["delta"] = config.delta;
    auto released = [](const dpanm::ReleaseOutcome& r) {
      return r.is_released() ? nlohmann::ordered_json(r.value())
                             : nlohmann::ordered_json(nullptr);
    };
    j["p_xy"] = released(rep.outcome_xy);
    j["p_yx"] = released(rep.outcome_yx);
    j["decision"] = std::string(dpanm::to_string(rep.decision));
    j["sigma"] = rep.noise_scale;
    j["predicted_utility"] =
        rep.predicted_utility ? nlohmann::ordered_json(*rep.predicted_utility)
                              : nlohmann::ordered_json(nullptr);
    j["budget_epsilon"] = rep.budget.epsilon;
    j["budget_delta"] = rep.budget.delta;
    j["note"] =
        "normalization ranges are data dependent and are not privatized";
    if (rep.decision == dpanm::Decision::kAbstain) status = kExitAbstain;
  }

  if (o.format == "json") {
    write_text(o.out, j.dump(2) + "\n");
  } else {
    std::ostringstream text;
    for (const auto& [key, value] : j.items()) {
      text << key << ": ";
      if (value.is_string()) {
        text << value.get<std::string>();
      } else if (value.is_number_float()) {
        text << format_number(value.get<double>());
      } else if (value.is_null()) {
        text << "bottom";
      } else {
        text << value.dump();
      }
      text << '\n';
    }
    write_text(o.out, text.str());
  }
  return status;
}

int cmd_sweep(const Options& o) {
  const dpanm::harness::ExperimentConfig config = make_config(o);
  const auto rows = dpanm::harness::run_sweep(config);
  dpanm::harness::emit_report(
      rows, dpanm::harness::parse_output_format(o.format), o.out, std::cout);
  const bool all_abstained = std::all_of(
      rows.begin(), rows.end(), [](const dpanm::harness::ResultRow& r) {
        return r.aggregate || r.decision == "abstain";
      });
  return config.private_mode() && all_abstained ? kExitAbstain : kExitOk;
}

int cmd_verify_utility(const std::vector<double>& gammas,
                       const std::vector<double>& sigmas, std::size_t draws,
                       std::uint64_t seed, const std::string& out) {
  if (draws < 100000) {
    throw dpanm::DomainError("verify-utility: --draws must be >= 100000");
  }
  const auto checks = dpanm::harness::verify_utility(gammas, sigmas, draws,
                                                     seed);
  std::ostringstream text;
  text << "scores,gamma,sigma,closed_form,monte_carlo,standard_error,gap,"
          "pass\n";
  bool ok = true;
  for (const auto& c : checks) {
    text << c.scores << ',' << format_number(c.gamma) << ','
         << format_number(c.sigma) << ',' << format_number(c.closed_form)
         << ',' << format_number(c.monte_carlo) << ','
         << format_number(c.standard_error) << ',' << format_number(c.gap)
         << ',' << (c.pass ? "pass" : "fail") << '\n';
    ok = ok && c.pass;
  }
  write_text(out, text.str());
  return ok ? kExitOk : kExitError;
}

int cmd_verify_sensitivity(const std::vector<std::size_t>& ms,
                           std::size_t instances, std::size_t grid_points,
                           const std::vector<std::size_t>& ns,
                           const std::vector<double>& lambdas,
                           std::size_t residual_instances, std::uint64_t seed,
                           double bandwidth, const std::string& out) {
  auto rows = dpanm::harness::verify_test_sensitivity(ms, instances,
                                                      grid_points, seed,
                                                      bandwidth);
  if (!ns.empty() && residual_instances > 0) {
    auto residual = dpanm::harness::verify_residual_bound(
        ns, ms, lambdas, residual_instances, seed, bandwidth);
    rows.insert(rows.end(), residual.begin(), residual.end());
  }
  std::ostringstream text;
  text << "score,m,n,lambda,instances,evaluations,empirical_max,bound,ratio,"
          "pass\n";
  bool ok = true;
  for (const auto& r : rows) {
    text << r.score << ',' << r.m << ',' << r.n << ','
         << format_number(r.lambda) << ',' << r.instances << ','
         << r.evaluations << ',' << format_number(r.empirical_max) << ','
         << format_number(r.bound) << ',' << format_number(r.ratio) << ','
         << (r.pass ? "pass" : "fail") << '\n';
    ok = ok && r.pass;
  }
  write_text(out, text.str());
  return ok ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private additive-noise-model causal inference"};
  app.require_subcommand(1);

  Options infer_opts;
  infer_opts.format = "text";
  auto* infer = app.add_subcommand("infer", "Infer the direction of one pair");
  add_experiment_flags(infer, infer_opts, false);
  infer->add_option("--pairs", infer_opts.pairs_file, "Pairs file");

  Options sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Run an experiment grid");
  add_experiment_flags(sweep, sweep_opts, true);
  sweep->add_option("--pairs", sweep_opts.pairs_file, "Pairs file");
  sweep->add_option("--trials", sweep_opts.trials, "Train/test splits");
  sweep->add_option("--draws", sweep_opts.draws, "Noise draws per split");
  sweep->add_option("--threads", sweep_opts.threads,
                    "Worker threads (0 = all cores)");

  std::vector<double> gammas{0.0, 0.04, 0.1, 1.0};
  std::vector<double> sigmas{0.04, 0.1, 1.0};
  std::size_t utility_draws = 1000000;
  std::uint64_t utility_seed = 0;
  std::string utility_out;
  auto* vu = app.add_subcommand("verify-utility",
                                "Monte Carlo check of the utility formulas");
  vu->add_option("--gamma", gammas, "Margins")->delimiter(',');
  vu->add_option("--sigma", sigmas, "Noise scales")->delimiter(',');
  vu->add_option("--draws", utility_draws, "Draws per cell (>= 100000)");
  vu->add_option("--seed", utility_seed, "Seed");
  vu->add_option("--out", utility_out, "Output file (default stdout)");

  std::vector<std::size_t> ms{10, 25, 50};
  std::vector<std::size_t> ns{100};
  std::vector<double> audit_lambdas{0.25, 0.5, 1.0};
  std::size_t instances = 20, grid_points = 50, residual_instances = 20;
  std::uint64_t audit_seed = 0;
  double audit_bandwidth = 0.5;
  std::string audit_out;
  auto* vs = app.add_subcommand("verify-sensitivity",
                                "Empirical audit of the sensitivity bounds");
  vs->add_option("--m", ms, "Test sizes")->delimiter(',');
  vs->add_option("--instances", instances, "Random datasets per m");
  vs->add_option("--grid-points", grid_points,
                 "Replacement values per coordinate");
  vs->add_option("--n", ns, "Training sizes for the residual audit")
      ->delimiter(',');
  vs->add_option("--lambda", audit_lambdas, "Lambdas for the residual audit")
      ->delimiter(',');
  vs->add_option("--residual-instances", residual_instances,
                 "Instances per residual-audit cell (0 skips it)");
  vs->add_option("--seed", audit_seed, "Seed");
  vs->add_option("--bandwidth", audit_bandwidth, "Kernel bandwidth");
  vs->add_option("--out", audit_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*infer) return cmd_infer(infer_opts);
    if (*sweep) return cmd_sweep(sweep_opts);
    if (*vu) {
      return cmd_verify_utility(gammas, sigmas, utility_draws, utility_seed,
                                utility_out);
    }
    if (*vs) {
      return cmd_verify_sensitivity(ms, instances, grid_points, ns,
                                    audit_lambdas, residual_instances,
                                    audit_seed, audit_bandwidth, audit_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "dpanm: error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
