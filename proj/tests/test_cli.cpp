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

// End-to-end checks of the dpsu binary (path injected by the build).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "dpsu/dpsu.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dpsu_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }

  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(DPSU_CLI_PATH) + " " + args + " > " +
                            path("stdout.txt") + " 2> " + path("stderr.txt");
    return std::system(cmd.c_str());
  }

  std::string slurp(const std::string& file) const {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }

  fs::path dir_;
};

TEST_F(CliTest, CalibratePrintsTheDocumentedJsonFields) {
  ASSERT_EQ(run("calibrate --mechanism policy-laplace --epsilon 3 "
                "--delta 4.5399929762484854e-05 --delta0 1 --alpha 5"),
            0);
  const json j = json::parse(slurp(path("stdout.txt")));
  EXPECT_EQ(j["mechanism"], "policy-laplace");
  EXPECT_DOUBLE_EQ(j["epsilon"].get<double>(), 3.0);
  EXPECT_EQ(j["delta0"], 1);
  EXPECT_DOUBLE_EQ(j["alpha"].get<double>(), 5.0);
  EXPECT_NEAR(j["scale"].get<double>(), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(j["rho"].get<double>(), 4.1022842731466849, 1e-9);
  EXPECT_NEAR(j["gamma"].get<double>(), 5.7689509398133516, 1e-9);
}

TEST_F(CliTest, SynthIsDeterministicAndLoadable) {
  ASSERT_EQ(run("synth --users 50 --vocab 100 --exponent 1.0 --seed 7 --out " +
                path("a.tsv")),
            0);
  ASSERT_EQ(run("synth --users 50 --vocab 100 --exponent 1.0 --seed 7 --out " +
                path("b.tsv")),
            0);
  EXPECT_EQ(slurp(path("a.tsv")), slurp(path("b.tsv")));
  const auto db = dpsu::load_corpus_file(path("a.tsv"), dpsu::CorpusFormat::kTsv);
  EXPECT_EQ(db.users.size(), 50u);
}

TEST_F(CliTest, RunProducesAReportAndItemList) {
  ASSERT_EQ(run("synth --users 300 --vocab 150 --mu 1.5 --sigma 0.5 --seed 3 --out " +
                path("corpus.tsv")),
            0);
  ASSERT_EQ(run("run --input " + path("corpus.tsv") +
                " --mechanism policy-gaussian --epsilon 3 --delta 4.54e-5 "
                "--delta0 10 --alpha 5 --seed 42 --output " +
                path("report.json") + " --items-out " + path("items.txt")),
            0);
  const json report = json::parse(slurp(path("report.json")));
  EXPECT_EQ(report["mechanism"], "policy-gaussian");
  EXPECT_EQ(report["private"], true);
  EXPECT_EQ(report["seed"], 42);
  const auto released = report["released"].get<std::vector<std::string>>();
  EXPECT_EQ(released.size(), report["released_size"].get<std::size_t>());
  EXPECT_LE(released.size(), report["histogram_support_size"].get<std::size_t>());

  std::istringstream items(slurp(path("items.txt")));
  std::size_t lines = 0;
  std::string line;
  while (std::getline(items, line)) {
    if (!line.empty()) ++lines;
  }
  EXPECT_EQ(lines, released.size());

  // Identical invocation gives byte-identical output.
  ASSERT_EQ(run("run --input " + path("corpus.tsv") +
                " --mechanism policy-gaussian --epsilon 3 --delta 4.54e-5 "
                "--delta0 10 --alpha 5 --seed 42 --output " +
                path("report2.json")),
            0);
  EXPECT_EQ(slurp(path("report.json")), slurp(path("report2.json")));
}

TEST_F(CliTest, RunRefusesGreedyDemo) {
  ASSERT_EQ(run("synth --users 10 --vocab 10 --seed 1 --out " + path("c.tsv")), 0);
  EXPECT_NE(run("run --input " + path("c.tsv") +
                " --mechanism greedy-demo --epsilon 3 --delta 1e-5"),
            0);
  const std::string err = slurp(path("stderr.txt"));
  EXPECT_NE(err.find("demonstration-only"), std::string::npos) << err;
}

TEST_F(CliTest, StatsReportsCountsOnAJsonlCorpus) {
  {
    std::ofstream out(path("corpus.jsonl"));
    out << R"({"user_id": "u1", "text": "apple banana"})" << "\n";
    out << R"({"user_id": "u2", "items": ["apple"]})" << "\n";
  }
  ASSERT_EQ(run("stats --input " + path("corpus.jsonl") + " --out " + path("stats.json")),
            0);
  const json stats = json::parse(slurp(path("stats.json")));
  EXPECT_EQ(stats["n_users"], 2);
  EXPECT_EQ(stats["n_items"], 2);
  EXPECT_DOUBLE_EQ(stats["set_size_percentiles"]["1"].get<double>(), 0.5);
}

TEST_F(CliTest, AuditPassesForDescentAndFlagsGreedy) {
  ASSERT_EQ(run("audit --policy l1-descent --trials 500 --out " + path("l1.json")), 0);
  const json l1 = json::parse(slurp(path("l1.json")));
  EXPECT_EQ(l1["verdict"], "pass");
  EXPECT_EQ(l1["passed"], 500);
  EXPECT_LE(l1["worst_gap"].get<double>(), 1.0 + 1e-9);

  ASSERT_EQ(run("audit --policy greedy --trials 200 --out " + path("greedy.json")), 0);
  const json greedy = json::parse(slurp(path("greedy.json")));
  ASSERT_TRUE(greedy.contains("greedy_blowup"));
  EXPECT_DOUBLE_EQ(greedy["greedy_blowup"][1]["l1_gap"].get<double>(), 11.0);
}

TEST_F(CliTest, GridRunsFromASpecAndIsReproducible) {
  ASSERT_EQ(run("synth --users 200 --vocab 100 --mu 1.5 --sigma 0.5 --seed 5 --out " +
                path("corpus.tsv")),
            0);
  {
    json spec;
    spec["corpus"] = path("corpus.tsv");
    spec["mechanisms"] = {"policy-laplace", "weighted-laplace"};
    spec["epsilons"] = {3.0};
    spec["delta"] = 4.54e-5;
    spec["delta0s"] = {2};
    spec["alphas"] = {5.0};
    spec["shuffles"] = 2;
    spec["base_seed"] = 9;
    std::ofstream out(path("spec.json"));
    out << spec.dump();
  }
  ASSERT_EQ(run("grid --spec " + path("spec.json") + " --out " + path("r1.json") +
                " --csv " + path("r1.csv") + " --markdown " + path("r1.md")),
            0);
  ASSERT_EQ(run("grid --spec " + path("spec.json") + " --out " + path("r2.json")), 0);
  EXPECT_EQ(slurp(path("r1.json")), slurp(path("r2.json")));

  const json result = json::parse(slurp(path("r1.json")));
  EXPECT_EQ(result["cells"].size(), 2u);
  const std::string csv = slurp(path("r1.csv"));
  EXPECT_EQ(csv.rfind("mechanism,epsilon,delta0,alpha,passes,mean,sd\n", 0), 0u);
  EXPECT_NE(slurp(path("r1.md")).find("|"), std::string::npos);
}

TEST_F(CliTest, KanonComputesCoverageAgainstAReleaseFile) {
  {
    std::ofstream out(path("corpus.tsv"));
    out << "u1\ta b\nu2\ta\nu3\ta b\n";
  }
  {
    std::ofstream out(path("released.txt"));
    out << "a\n";
  }
  ASSERT_EQ(run("kanon --input " + path("corpus.tsv") + " --released " +
                path("released.txt") + " --k 2,3 --out " + path("kanon.json")),
            0);
  const json rows = json::parse(slurp(path("kanon.json")));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0]["k"], 2);
  EXPECT_EQ(rows[0]["size_sk"], 2);
  EXPECT_DOUBLE_EQ(rows[0]["coverage"].get<double>(), 0.5);
  EXPECT_EQ(rows[1]["size_sk"], 1);
}

TEST_F(CliTest, UnknownMechanismFailsCleanly) {
  EXPECT_NE(run("calibrate --mechanism nope --epsilon 3 --delta 1e-5"), 0);
  EXPECT_NE(slurp(path("stderr.txt")).find("unknown mechanism"), std::string::npos);
}

}  // namespace
