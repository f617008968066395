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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "dpanm/dpanm.hpp"
#include "dpanm/harness/report.hpp"
#include "dpanm/harness/sweep.hpp"
#include "dpanm/harness/verify.hpp"
#include "json.hpp"

namespace dpanm::harness {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

ResultRow sample_row() {
  ResultRow r;
  r.dataset = "pair0001";
  r.score = "hsic";
  r.epsilon = 0.5;
  r.lambda = 0.001;
  r.seed = 17;
  r.decision = "x->y";
  r.correct = 1.0;
  r.abstained = 0.0;
  r.margin = 0.0123;
  r.sigma = 0.2;
  r.predicted_utility = 0.51;
  return r;
}

TEST(ReportTest, CsvHeaderAndOneRow) {
  const auto lines = lines_of(render_report({sample_row()}, OutputFormat::kCsv));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], kCsvHeader);
  EXPECT_EQ(lines[1], "pair0001,hsic,0.5,0.001,17,x->y,true,false,0.0123,0.2,0.51");
}

TEST(ReportTest, CsvNonPrivateAndAggregate) {
  ResultRow r = sample_row();
  r.epsilon.reset();
  r.sigma.reset();
  r.predicted_utility.reset();
  r.correct.reset();
  r.margin = std::nan("");
  ResultRow agg = sample_row();
  agg.aggregate = true;
  agg.decision = "mean";
  agg.seed = 10;
  agg.correct = 0.7;
  agg.abstained = 0.1;
  const auto lines = lines_of(render_report({r, agg}, OutputFormat::kCsv));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[1], "pair0001,hsic,,0.001,17,x->y,,false,nan,,");
  EXPECT_EQ(lines[2], "pair0001,hsic,0.5,0.001,10,mean,0.7,0.1,0.0123,0.2,0.51");
}

TEST(ReportTest, JsonRoundTrips) {
  ResultRow r = sample_row();
  r.margin = std::nan("");
  const auto text = render_report({sample_row(), r}, OutputFormat::kJson);
  const auto j = nlohmann::json::parse(text);
  ASSERT_TRUE(j.is_array());
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["dataset"], "pair0001");
  EXPECT_EQ(j[0]["correct"], true);
  EXPECT_DOUBLE_EQ(j[0]["epsilon"].get<double>(), 0.5);
  EXPECT_TRUE(j[1]["margin"].is_null());
  const auto ordered = nlohmann::ordered_json::parse(text);
  std::string joined;
  for (const auto& [k, v] : ordered[0].items()) {
    joined += (joined.empty() ? "" : ",") + k;
  }
  EXPECT_EQ(joined, kCsvHeader);
}

TEST(ReportTest, EmptyRowsRejected) {
  std::ostringstream sink;
  EXPECT_THROW(emit_report({}, OutputFormat::kCsv, "", sink), DomainError);
  EXPECT_THROW(parse_output_format("xml"), DomainError);
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.synthetic = SyntheticSpec{SynthShape::kCubic, 80, 0.3};
  c.scores = {ScoreKind::kHsic, ScoreKind::kKendallTau, ScoreKind::kIqr};
  c.epsilons = {0.5, 1.0};
  c.lambdas = {0.1, 1.0};
  c.splits = 3;
  c.draws = 2;
  c.seed = 123;
  return c;
}

TEST(SweepTest, ShapeAndAggregates) {
  const auto c = small_config();
  const auto rows = run_sweep(c);
  const std::size_t cells = 3 * 2 * 2;
  ASSERT_EQ(rows.size(), cells * (c.trials() + 1));
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const std::size_t base = cell * (c.trials() + 1);
    const ResultRow& agg = rows[base + c.trials()];
    ASSERT_TRUE(agg.aggregate);
    EXPECT_EQ(agg.decision, "mean");
    EXPECT_EQ(agg.seed, c.trials());
    double correct = 0, abstained = 0;
    for (std::size_t t = 0; t < c.trials(); ++t) {
      const ResultRow& r = rows[base + t];
      EXPECT_FALSE(r.aggregate);
      EXPECT_EQ(r.score, agg.score);
      EXPECT_NE(r.decision, "error");
      correct += r.correct.value_or(0.0);
      abstained += r.abstained;
      EXPECT_EQ(r.correct.has_value(), r.decision != "abstain");
    }
    EXPECT_DOUBLE_EQ(*agg.correct, correct / c.trials());
    EXPECT_DOUBLE_EQ(agg.abstained, abstained / c.trials());
  }
}

TEST(SweepTest, DeterministicAcrossThreadCounts) {
  auto c = small_config();
  const auto one = run_sweep(c);
  c.threads = 4;
  const auto four = run_sweep(c);
  for (auto f : {OutputFormat::kCsv, OutputFormat::kJson}) {
    EXPECT_EQ(render_report(one, f), render_report(four, f));
  }
  c.seed = 124;
  EXPECT_NE(render_report(run_sweep(c), OutputFormat::kCsv),
            render_report(one, OutputFormat::kCsv));
}

TEST(SweepTest, NonPrivateRowsAndErrors) {
  ExperimentConfig c;
  SamplePairs good = synth_anm(SynthShape::kSigmoid, 60, 0.2, 1);
  good.id = "good";
  SamplePairs flat;
  flat.id = "flat";
  flat.x.assign(40, 1.0);
  flat.y.assign(40, 2.0);
  c.datasets = {good, flat};
  c.scores = {ScoreKind::kVariance, ScoreKind::kSpearmanRho};
  c.splits = 2;
  const auto rows = run_sweep(c);
  ASSERT_EQ(rows.size(), 2u * 2u * 3u);
  for (const auto& r : rows) {
    EXPECT_FALSE(r.epsilon.has_value());
    EXPECT_FALSE(r.sigma.has_value());
    if (r.aggregate) continue;
    EXPECT_EQ(r.decision == "error", r.dataset == "flat") << r.dataset;
  }
}

TEST(SweepTest, InvalidConfigs) {
  auto c = small_config();
  c.lambdas = {};
  EXPECT_THROW(run_sweep(c), DomainError);
  c = small_config();
  c.target = Target::kBoth;
  EXPECT_THROW(run_sweep(c), UnsupportedError);
  c = small_config();
  c.epsilons = {};
  EXPECT_THROW(run_sweep(c), DomainError);  // draws > 1 without privacy
}

// Auditors against the full score functions.

TEST(AuditorTest, RankAuditorsMatchFullScores) {
  NoiseStream rng(4);
  std::vector<double> a, b;
  for (std::size_t inst = 0; inst < 20; ++inst) {
    detail::audit_instance(15, inst, rng, a, b);
    KendallAuditor kt(a, b);
    SpearmanAuditor sp(a, b);
    EXPECT_EQ(kt.value(), kendall_tau(a, b).value);
    const auto ga = detail::replacement_grid(a, 5);
    const auto gb = detail::replacement_grid(b, 5);
    for (std::size_t i = 0; i < a.size(); i += 3) {
      for (double an : ga) {
        kt.prepare(i, an);
        sp.prepare(i, an);
        for (double bn : gb) {
          auto a2 = a, b2 = b;
          a2[i] = an;
          b2[i] = bn;
          ASSERT_EQ(kt.with_b(bn), kendall_tau(a2, b2).value);
          ASSERT_EQ(sp.with_b(bn), spearman_rho(a2, b2).value);
        }
      }
    }
  }
}

TEST(AuditorTest, HsicAuditorMatchesFullScore) {
  NoiseStream rng(5);
  const KernelSpec k(0.5);
  std::vector<double> a, b;
  for (std::size_t inst = 0; inst < 6; ++inst) {
    detail::audit_instance(12, inst, rng, a, b);
    HsicAuditor<> aud(a, b, k);
    for (std::size_t i = 0; i < a.size(); i += 4) {
      aud.prepare_index(i);
      for (double an : {-1.0, 0.3, a[0]}) {
        aud.prepare(an);
        for (double bn : {1.0, -0.25, b[1]}) {
          auto a2 = a, b2 = b;
          a2[i] = an;
          b2[i] = bn;
          ASSERT_NEAR(aud.with_b(bn), hsic(a2, b2, k).value, 1e-12);
        }
      }
    }
  }
}

TEST(VerifyTest, SmallSensitivityAuditPasses) {
  const auto rows = verify_test_sensitivity({10}, 4, 9, 1);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.pass) << r.score << " ratio " << r.ratio;
    EXPECT_GT(r.empirical_max, 0.0);
  }
  const auto res = verify_residual_bound({20}, {10}, {0.5}, 3, 1);
  ASSERT_EQ(res.size(), 1u);
  EXPECT_TRUE(res[0].pass);
}

TEST(VerifyTest, UtilityCellsPass) {
  const auto rows = verify_utility({0.1}, {0.1, 1.0}, 200000, 3);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) EXPECT_TRUE(r.pass) << r.gap;
}

// CLI.

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(DPANM_CLI_PATH) + " " + args + " 2>&1";
  CliResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  const int status = pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dpanm_cli_" + std::string(::testing::UnitTest::GetInstance()
                                           ->current_test_info()
                                           ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run_cli("infer --pairs " + (dir_ / "missing.txt").string())
                .exit_code,
            1);
  EXPECT_EQ(run_cli("infer --synthetic cubic --score nonsense").exit_code, 1);
  EXPECT_EQ(run_cli("infer --synthetic cubic --score hsic --lambda 2").exit_code,
            1);
  const auto ok = run_cli("infer --synthetic cubic --score hsic");
  EXPECT_EQ(ok.exit_code, 0) << ok.out;
  EXPECT_NE(ok.out.find("decision: x->y"), std::string::npos) << ok.out;
  // Tiny m and advanced composition: the IQR release always abstains.
  const auto abst = run_cli(
      "infer --synthetic cubic --n-total 10 --test-fraction 0.4 --score iqr "
      "--epsilon 1 --lambda 0.5");
  EXPECT_EQ(abst.exit_code, 2) << abst.out;
}

TEST_F(CliTest, PrivateOutputHasNoRawValues) {
  SamplePairs s = synth_anm(SynthShape::kCubic, 120, 0.3, 77);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s.x[i] = 1000.0 + 3.0 * s.x[i];
    s.y[i] = -50.0 + 7.0 * s.y[i];
  }
  const fs::path p = dir_ / "pair.txt";
  write_pairs_file(p, s);
  SamplePairs normalized = normalize(s);
  for (const char* score : {"hsic", "kendall", "spearman", "iqr"}) {
    const auto r = run_cli("infer --pairs " + p.string() + " --score " +
                           score + " --epsilon 1 --lambda 0.5 --format json");
    ASSERT_NE(r.exit_code, 1) << r.out;
    for (std::vector<double>* v :
         {&s.x, &s.y, &normalized.x, &normalized.y}) {
      for (double value : *v) {
        const std::string text = dpanm::detail::format_number(value);
        // Short strings such as "-1" or "997" occur by chance.
        if (text.size() < 7) continue;
        EXPECT_EQ(r.out.find(text), std::string::npos)
            << score << " leaked " << text;
      }
    }
  }
}

TEST_F(CliTest, SingleCellSweepMatchesInfer) {
  const fs::path p = dir_ / "pair.txt";
  write_pairs_file(p, synth_anm(SynthShape::kSigmoid, 200, 0.3, 9));
  for (const std::string score : {"hsic", "kendall", "iqr"}) {
    const std::string common = "--pairs " + p.string() + " --score " + score +
                               " --epsilon 1 --lambda 0.25 --seed 41";
    const auto inf = run_cli("infer " + common + " --format json");
    const auto sw = run_cli("sweep " + common + " --trials 1 --format json");
    ASSERT_NE(inf.exit_code, 1) << inf.out;
    ASSERT_NE(sw.exit_code, 1) << sw.out;
    const auto ji = nlohmann::json::parse(inf.out);
    const auto js = nlohmann::json::parse(sw.out);
    ASSERT_EQ(js.size(), 2u);
    EXPECT_EQ(ji["decision"], js[0]["decision"]) << score;
    if (ji["sigma"].is_number()) {
      EXPECT_NEAR(ji["sigma"].get<double>(), js[0]["sigma"].get<double>(),
                  1e-11 * ji["sigma"].get<double>());
    }
  }
}

TEST_F(CliTest, SweepWritesFileAndIsReproducible) {
  const std::string args =
      "sweep --synthetic sigmoid --n-total 60 --score hsic,kendall "
      "--epsilon 0.5,1 --lambda 0.1,1 --trials 3 --draws 2 --seed 5 --out ";
  const auto a = run_cli(args + (dir_ / "a.csv").string() + " --threads 1");
  const auto b = run_cli(args + (dir_ / "b.csv").string() + " --threads 3");
  ASSERT_EQ(a.exit_code, 0) << a.out;
  ASSERT_EQ(b.exit_code, 0) << b.out;
  auto slurp = [](const fs::path& f) {
    std::ifstream in(f, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };
  const std::string ta = slurp(dir_ / "a.csv");
  EXPECT_EQ(ta, slurp(dir_ / "b.csv"));
  EXPECT_EQ(lines_of(ta).size(), 1u + 2 * 2 * 2 * (6 + 1));
}

TEST_F(CliTest, VerifySubcommands) {
  const auto u = run_cli(
      "verify-utility --gamma 0.1 --sigma 0.5 --draws 100000 --seed 2");
  EXPECT_EQ(u.exit_code, 0) << u.out;
  const auto s = run_cli(
      "verify-sensitivity --m 8 --instances 2 --grid-points 5 --n 20 "
      "--lambda 0.5 --residual-instances 2");
  EXPECT_EQ(s.exit_code, 0) << s.out;
}

}  // namespace
}  // namespace dpanm::harness
