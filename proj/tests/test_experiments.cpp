//
// Copyright 2026 The DPSU Authors
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

#include "dpsu/experiments.hpp"

#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>

#include "dpsu/ingestion.hpp"

namespace dpsu {
namespace {

constexpr double kDeltaE10 = 4.5399929762484854e-05;

Database small_corpus() {
  SynthSpec spec;
  spec.n_users = 400;
  spec.vocab_size = 300;
  spec.mu = 1.8;
  spec.sigma = 0.8;
  spec.seed = 1234;
  return synth_zipf_corpus(spec);
}

ExperimentSpec one_cell_spec() {
  ExperimentSpec spec;
  spec.mechanisms = {Mechanism::kPolicyGaussian};
  spec.epsilons = {3.0};
  spec.delta = kDeltaE10;
  spec.delta0s = {4};
  spec.alphas = {5.0};
  spec.shuffles = 1;
  spec.base_seed = 42;
  return spec;
}

TEST(RunGrid, SingleCellMatchesASingleRun) {
  const Database db = small_corpus();
  const ExperimentSpec spec = one_cell_spec();
  const ExperimentResult result = run_grid(db, spec);
  ASSERT_EQ(result.cells.size(), 1u);
  const CellResult& cell = result.cells[0];
  ASSERT_FALSE(cell.failed());

  MechanismConfig config;
  config.mechanism = Mechanism::kPolicyGaussian;
  config.delta0 = 4;
  config.alpha = 5.0;
  config.seed = 42;
  const auto report = run_dpsu(db, config, {3.0, kDeltaE10});
  ASSERT_EQ(cell.sizes.size(), 1u);
  EXPECT_EQ(cell.sizes[0], report.released_size);
  EXPECT_DOUBLE_EQ(cell.mean, static_cast<double>(report.released_size));
  EXPECT_DOUBLE_EQ(cell.sd, 0.0);
}

TEST(RunGrid, RepeatedSeedsHaveZeroVariance) {
  const Database db = small_corpus();
  ExperimentSpec spec = one_cell_spec();
  spec.shuffles = 5;
  spec.seed_stride = 0;  // every shuffle sees the identical seed
  const ExperimentResult result = run_grid(db, spec);
  ASSERT_EQ(result.cells.size(), 1u);
  EXPECT_DOUBLE_EQ(result.cells[0].sd, 0.0);
}

TEST(RunGrid, MeanLiesWithinTheSampleRange) {
  const Database db = small_corpus();
  ExperimentSpec spec = one_cell_spec();
  spec.shuffles = 5;
  spec.mechanisms = {Mechanism::kPolicyLaplace, Mechanism::kWeightedLaplace};
  const ExperimentResult result = run_grid(db, spec);
  for (const CellResult& cell : result.cells) {
    ASSERT_FALSE(cell.failed());
    const auto [lo, hi] = std::minmax_element(cell.sizes.begin(), cell.sizes.end());
    EXPECT_GE(cell.mean, static_cast<double>(*lo));
    EXPECT_LE(cell.mean, static_cast<double>(*hi));
  }
}

TEST(RunGrid, CellFailuresAreRecordedAndTheGridContinues) {
  const Database db = small_corpus();
  ExperimentSpec spec = one_cell_spec();
  // greedy-demo is refused by the pipeline; the other mechanism still runs.
  spec.mechanisms = {Mechanism::kGreedyDemo, Mechanism::kWeightedLaplace};
  const ExperimentResult result = run_grid(db, spec);
  ASSERT_EQ(result.cells.size(), 2u);
  EXPECT_TRUE(result.cells[0].failed());
  EXPECT_TRUE(result.cells[0].sizes.empty());
  EXPECT_FALSE(result.cells[1].failed());
}

TEST(RunGrid, MultiPassCellsRequireTheExperimentalFlag) {
  const Database db = small_corpus();
  ExperimentSpec spec = one_cell_spec();
  spec.passes = {2};
  const ExperimentResult refused = run_grid(db, spec);
  ASSERT_EQ(refused.cells.size(), 1u);
  EXPECT_TRUE(refused.cells[0].failed());

  spec.experimental = true;
  const ExperimentResult allowed = run_grid(db, spec);
  EXPECT_FALSE(allowed.cells[0].failed());
}

TEST(RunGrid, DeterministicAcrossRunsAndWorkerCounts) {
  const Database db = small_corpus();
  ExperimentSpec spec = one_cell_spec();
  spec.mechanisms = {Mechanism::kPolicyLaplace, Mechanism::kPolicyGaussian,
                     Mechanism::kCountLaplace};
  spec.delta0s = {1, 4};
  spec.shuffles = 3;

  setenv("DPSU_WORKERS", "1", 1);
  const ExperimentResult serial = run_grid(db, spec);
  setenv("DPSU_WORKERS", "4", 1);
  const ExperimentResult parallel = run_grid(db, spec);
  unsetenv("DPSU_WORKERS");

  std::ostringstream a, b;
  emit_report(serial, ReportFormat::kJson, a);
  emit_report(parallel, ReportFormat::kJson, b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_FALSE(a.str().empty());
}

TEST(ComparePasses, ProducesAWelchTestPerCoordinate) {
  const Database db = small_corpus();
  ExperimentSpec spec = one_cell_spec();
  spec.mechanisms = {Mechanism::kPolicyGaussian, Mechanism::kPolicyLaplace};
  spec.shuffles = 4;
  const auto comparisons = compare_passes(db, spec);
  ASSERT_EQ(comparisons.size(), 2u);
  for (const auto& cmp : comparisons) {
    EXPECT_EQ(cmp.single_pass.passes, 1);
    EXPECT_EQ(cmp.double_pass.passes, 2);
    EXPECT_EQ(cmp.single_pass.sizes.size(), 4u);
    EXPECT_GE(cmp.test.p_value, 0.0);
    EXPECT_LE(cmp.test.p_value, 1.0);
  }
}

TEST(ComparePasses, RequiresAtLeastTwoShuffles) {
  const Database db = small_corpus();
  ExperimentSpec spec = one_cell_spec();
  spec.shuffles = 1;
  EXPECT_THROW(compare_passes(db, spec), std::invalid_argument);
}

TEST(EmitReport, CsvHasTheDocumentedColumns) {
  const Database db = small_corpus();
  const ExperimentResult result = run_grid(db, one_cell_spec());
  std::ostringstream out;
  emit_report(result, ReportFormat::kCsv, out);
  std::istringstream lines(out.str());
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "mechanism,epsilon,delta0,alpha,passes,mean,sd");
  std::string row;
  std::getline(lines, row);
  EXPECT_EQ(row.rfind("policy-gaussian,3,4,5,1,", 0), 0u) << row;
}

TEST(EmitReport, JsonRoundTripsThroughTheParser) {
  const Database db = small_corpus();
  const ExperimentResult result = run_grid(db, one_cell_spec());
  std::ostringstream out;
  emit_report(result, ReportFormat::kJson, out);
  const auto parsed = nlohmann::json::parse(out.str());
  ASSERT_TRUE(parsed.contains("cells"));
  ASSERT_EQ(parsed["cells"].size(), 1u);
  EXPECT_EQ(parsed["cells"][0]["mechanism"], "policy-gaussian");
  EXPECT_EQ(parsed["cells"][0]["sizes"].size(), 1u);
}

TEST(EmitReport, MarkdownRendersMeanPlusMinusSd) {
  const Database db = small_corpus();
  ExperimentSpec spec = one_cell_spec();
  spec.shuffles = 3;
  spec.epsilons = {1.0, 3.0};
  const ExperimentResult result = run_grid(db, spec);
  std::ostringstream out;
  emit_report(result, ReportFormat::kMarkdown, out);
  const std::string text = out.str();
  EXPECT_NE(text.find("±"), std::string::npos);
  EXPECT_NE(text.find("policy-gaussian"), std::string::npos);
  EXPECT_NE(text.find("released size vs epsilon"), std::string::npos);
}

Database trend_corpus() {
  SynthSpec spec;
  spec.n_users = 3000;
  spec.vocab_size = 8000;
  spec.zipf_exponent = 1.0;
  spec.seed = 555;
  return synth_zipf_corpus(spec);
}

TEST(RunGrid, CutoffHeadroomHelpsThePolicyMechanisms) {
  // alpha = 2 releases far more than alpha = 0, after which the curve
  // flattens: with no headroom above the threshold, noise pushes items
  // below rho and nothing compensates.
  const Database db = trend_corpus();
  ExperimentSpec spec;
  spec.mechanisms = {Mechanism::kPolicyLaplace, Mechanism::kPolicyGaussian};
  spec.epsilons = {3.0};
  spec.delta = kDeltaE10;
  spec.delta0s = {100};
  spec.alphas = {0.0, 2.0};
  spec.shuffles = 5;
  spec.base_seed = 7;
  const ExperimentResult result = run_grid(db, spec);
  std::map<std::pair<Mechanism, double>, double> means;
  for (const CellResult& cell : result.cells) {
    ASSERT_FALSE(cell.failed());
    means[{cell.mechanism, cell.alpha}] = cell.mean;
  }
  EXPECT_GT((means[{Mechanism::kPolicyLaplace, 2.0}]),
            (means[{Mechanism::kPolicyLaplace, 0.0}]));
  EXPECT_GT((means[{Mechanism::kPolicyGaussian, 2.0}]),
            (means[{Mechanism::kPolicyGaussian, 0.0}]));
}

TEST(ComparePasses, SecondPassMakesNoSignificantDifference) {
  // Statistical check with frozen seeds, validated once at authoring time:
  // p > 0.01 in at least 4 of 5 replications.
  const Database db = trend_corpus();
  int insignificant = 0;
  for (std::uint64_t rep = 0; rep < 5; ++rep) {
    ExperimentSpec spec;
    spec.mechanisms = {Mechanism::kPolicyGaussian};
    spec.epsilons = {3.0};
    spec.delta = kDeltaE10;
    spec.delta0s = {50};
    spec.alphas = {2.0};
    spec.shuffles = 5;
    spec.base_seed = 100 + rep * 31;
    const auto comparisons = compare_passes(db, spec);
    ASSERT_EQ(comparisons.size(), 1u);
    if (comparisons[0].test.p_value > 0.01) ++insignificant;
  }
  EXPECT_GE(insignificant, 4);
}

TEST(ExperimentSpecValidation, RejectsEmptyListsAndBadShuffles) {
  ExperimentSpec spec = one_cell_spec();
  spec.mechanisms.clear();
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = one_cell_spec();
  spec.shuffles = 0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace dpsu
