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

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpsu/dpsu.hpp"

namespace {

using nlohmann::json;

dpsu::CorpusFormat resolve_format(const std::string& path, const std::string& flag) {
  if (flag == "jsonl") return dpsu::CorpusFormat::kJsonl;
  if (flag == "tsv") return dpsu::CorpusFormat::kTsv;
  if (!flag.empty()) throw CLI::ValidationError("--format must be jsonl or tsv");
  if (path.ends_with(".jsonl") || path.ends_with(".json")) {
    return dpsu::CorpusFormat::kJsonl;
  }
  if (path.ends_with(".tsv") || path.ends_with(".txt")) {
    return dpsu::CorpusFormat::kTsv;
  }
  throw CLI::ValidationError("cannot infer corpus format from '" + path +
                             "'; pass --format jsonl|tsv");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write to " + path);
  out << text;
}

struct CorpusOptions {
  std::string input;
  std::string format;
  int ngram = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--input", input, "corpus file (JSONL or TSV)")->required();
    cmd->add_option("--format", format, "corpus format: jsonl or tsv (default: by extension)");
    cmd->add_option("--ngram", ngram, "n-gram order for raw-text records")
        ->check(CLI::PositiveNumber);
  }

  dpsu::Database load() const {
    return dpsu::load_corpus_file(input, resolve_format(input, format), ngram);
  }
};

dpsu::ExperimentSpec parse_grid_spec(const json& j) {
  dpsu::ExperimentSpec spec;
  for (const auto& name : j.at("mechanisms")) {
    spec.mechanisms.push_back(dpsu::mechanism_from_name(name.get<std::string>()));
  }
  spec.epsilons = j.at("epsilons").get<std::vector<double>>();
  spec.delta = j.at("delta").get<double>();
  spec.delta0s = j.at("delta0s").get<std::vector<int>>();
  spec.alphas = j.at("alphas").get<std::vector<double>>();
  spec.shuffles = j.value("shuffles", 5);
  spec.passes = j.value("passes", std::vector<int>{1});
  spec.base_seed = j.value("base_seed", std::uint64_t{0});
  spec.experimental = j.value("experimental", false);
  return spec;
}

int run_main(int argc, char** argv) {
  CLI::App app{"differentially private set union toolkit"};
  app.require_subcommand(1);

  // --- calibrate ---------------------------------------------------------
  auto* calibrate_cmd =
      app.add_subcommand("calibrate", "print noise scale, threshold and cutoff as JSON");
  std::string cal_mechanism = "policy-gaussian";
  double cal_epsilon = 3.0, cal_delta = 0.0, cal_alpha = 5.0;
  int cal_delta0 = 1;
  std::string cal_out;
  calibrate_cmd->add_option("--mechanism", cal_mechanism, "mechanism name");
  calibrate_cmd->add_option("--epsilon", cal_epsilon)->required();
  calibrate_cmd->add_option("--delta", cal_delta)->required();
  calibrate_cmd->add_option("--delta0", cal_delta0)->check(CLI::PositiveNumber);
  calibrate_cmd->add_option("--alpha", cal_alpha);
  calibrate_cmd->add_option("--out", cal_out, "output file (default: stdout)");
  calibrate_cmd->callback([&] {
    const auto mechanism = dpsu::mechanism_from_name(cal_mechanism);
    const dpsu::PrivacyParams params{cal_epsilon, cal_delta};
    const auto cal = dpsu::calibrate(mechanism, params, cal_delta0, cal_alpha);
    write_text(cal_out,
               dpsu::calibration_to_json(mechanism, params, cal_delta0, cal_alpha, cal)
                       .dump(2) +
                   "\n");
  });

  // --- run ----------------------------------------------------------------
  auto* run_cmd = app.add_subcommand("run", "run one DPSU release end to end");
  CorpusOptions run_corpus;
  run_corpus.attach(run_cmd);
  std::string run_mechanism = "policy-gaussian";
  double run_epsilon = 3.0, run_delta = 0.0, run_alpha = 5.0;
  int run_delta0 = 1, run_passes = 1;
  std::uint64_t run_seed = 0;
  bool run_experimental = false;
  std::string run_output, run_items_out;
  run_cmd->add_option("--mechanism", run_mechanism);
  run_cmd->add_option("--epsilon", run_epsilon)->required();
  run_cmd->add_option("--delta", run_delta)->required();
  run_cmd->add_option("--delta0", run_delta0)->check(CLI::PositiveNumber);
  run_cmd->add_option("--alpha", run_alpha);
  run_cmd->add_option("--seed", run_seed);
  run_cmd->add_option("--passes", run_passes)->check(CLI::PositiveNumber);
  run_cmd->add_flag("--experimental", run_experimental,
                    "allow experimental settings (passes > 1); clears the private flag");
  run_cmd->add_option("--output", run_output, "report JSON file (default: stdout)");
  run_cmd->add_option("--items-out", run_items_out,
                      "also write released items as plain text, one per line");
  run_cmd->callback([&] {
    const auto db = run_corpus.load();
    dpsu::MechanismConfig config;
    config.mechanism = dpsu::mechanism_from_name(run_mechanism);
    config.delta0 = run_delta0;
    config.alpha = run_alpha;
    config.seed = run_seed;
    config.passes = run_passes;
    config.experimental = run_experimental;
    const auto report = dpsu::run_dpsu(db, config, {run_epsilon, run_delta});
    write_text(run_output, dpsu::release_report_to_json(report).dump(2) + "\n");
    if (!run_items_out.empty()) {
      std::string lines;
      for (const auto& item : report.released) {
        lines += item;
        lines += '\n';
      }
      write_text(run_items_out, lines);
    }
  });

  // --- stats ---------------------------------------------------------------
  auto* stats_cmd = app.add_subcommand("stats", "descriptive corpus statistics");
  CorpusOptions stats_corpus;
  stats_corpus.attach(stats_cmd);
  std::vector<std::size_t> stats_thresholds;
  std::string stats_out;
  stats_cmd->add_option("--thresholds", stats_thresholds,
                        "extra set-size thresholds for the percentile table");
  stats_cmd->add_option("--out", stats_out, "output file (default: stdout)");
  stats_cmd->callback([&] {
    const auto db = stats_corpus.load();
    const auto stats = dpsu::corpus_stats(db, stats_thresholds);
    write_text(stats_out, dpsu::corpus_stats_to_json(stats).dump(2) + "\n");
  });

  // --- synth ---------------------------------------------------------------
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic Zipf corpus (TSV)");
  dpsu::SynthSpec synth;
  std::string synth_out;
  synth_cmd->add_option("--users", synth.n_users)->required()->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--vocab", synth.vocab_size)->required()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--exponent", synth.zipf_exponent, "Zipf exponent (default 1.0)");
  synth_cmd->add_option("--mu", synth.mu, "lognormal set-size mu (default 3.0)");
  synth_cmd->add_option("--sigma", synth.sigma, "lognormal set-size sigma (default 1.0)");
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--out", synth_out, "output TSV (default: stdout)");
  synth_cmd->callback([&] {
    const auto db = dpsu::synth_zipf_corpus(synth);
    std::ostringstream os;
    dpsu::write_corpus_tsv(db, os);
    write_text(synth_out, os.str());
  });

  // --- audit ---------------------------------------------------------------
  auto* audit_cmd =
      app.add_subcommand("audit", "randomized contraction audit of an update policy");
  std::string audit_policy = "l1-descent";
  int audit_trials = 10000;
  std::uint64_t audit_seed = 0;
  double audit_gamma = 5.0;
  int audit_delta0 = 4;
  std::string audit_out;
  audit_cmd->add_option("--policy", audit_policy, "l1-descent, l2-descent or greedy");
  audit_cmd->add_option("--trials", audit_trials)->check(CLI::PositiveNumber);
  audit_cmd->add_option("--seed", audit_seed);
  audit_cmd->add_option("--gamma", audit_gamma, "cutoff used in the trials");
  audit_cmd->add_option("--delta0", audit_delta0, "max update-set size in the trials")
      ->check(CLI::PositiveNumber);
  audit_cmd->add_option("--out", audit_out, "output file (default: stdout)");
  audit_cmd->callback([&] {
    dpsu::PolicyKind kind;
    dpsu::Norm norm;
    if (audit_policy == "l1-descent") {
      kind = dpsu::PolicyKind::kL1Descent;
      norm = dpsu::Norm::kL1;
    } else if (audit_policy == "l2-descent") {
      kind = dpsu::PolicyKind::kL2Descent;
      norm = dpsu::Norm::kL2;
    } else if (audit_policy == "greedy") {
      kind = dpsu::PolicyKind::kGreedy;
      norm = dpsu::Norm::kL1;
    } else {
      throw CLI::ValidationError("--policy must be l1-descent, l2-descent or greedy");
    }
    dpsu::ContractionTrialConfig trial_config;
    trial_config.gamma = audit_gamma;
    trial_config.max_set_size = audit_delta0;

    int passed = 0;
    double worst_gap = 0.0;
    std::optional<dpsu::ContractionTrialResult> worst;
    for (int i = 0; i < audit_trials; ++i) {
      const auto trial = dpsu::contraction_trial(
          kind, norm, audit_seed + static_cast<std::uint64_t>(i), trial_config);
      if (trial.pass) ++passed;
      if (trial.dist_after > worst_gap) {
        worst_gap = trial.dist_after;
        worst = trial;
      }
    }

    json verdict;
    verdict["policy"] = audit_policy;
    verdict["norm"] = norm == dpsu::Norm::kL1 ? "l1" : "l2";
    verdict["trials"] = audit_trials;
    verdict["passed"] = passed;
    verdict["failed"] = audit_trials - passed;
    verdict["worst_gap"] = worst_gap;
    verdict["verdict"] = passed == audit_trials ? "pass" : "fail";
    if (worst) {
      json trace;
      trace["dist_before"] = worst->dist_before;
      trace["dist_after"] = worst->dist_after;
      trace["w"] = worst->w;
      trace["h1_before"] = worst->h1_before.weights();
      trace["h2_before"] = worst->h2_before.weights();
      trace["h1_after"] = worst->h1_after.weights();
      trace["h2_after"] = worst->h2_after.weights();
      verdict["worst_case"] = trace;
    }
    if (kind == dpsu::PolicyKind::kGreedy) {
      // The constructive blow-up: the l1 gap grows linearly in the number
      // of users that follow the disputed one.
      json blowup = json::array();
      for (const int n : {6, 10, 20}) {
        const int i = (n + 1) / 2;
        const auto demo = dpsu::greedy_counterexample(n, i, 10.0 * n);
        blowup.push_back({{"n", n}, {"i", i}, {"l1_gap", demo.l1_gap}});
      }
      verdict["greedy_blowup"] = blowup;
    }
    write_text(audit_out, verdict.dump(2) + "\n");
  });

  // --- grid ----------------------------------------------------------------
  auto* grid_cmd = app.add_subcommand("grid", "run an experiment grid from a JSON spec");
  std::string grid_spec_path, grid_out, grid_csv, grid_markdown;
  grid_cmd->add_option("--spec", grid_spec_path, "experiment spec JSON")->required();
  grid_cmd->add_option("--out", grid_out, "result JSON file (default: stdout)");
  grid_cmd->add_option("--csv", grid_csv, "also write a flat CSV");
  grid_cmd->add_option("--markdown", grid_markdown, "also write Markdown tables");
  grid_cmd->callback([&] {
    std::ifstream in(grid_spec_path);
    if (!in) throw std::runtime_error("cannot open spec: " + grid_spec_path);
    json spec_json;
    in >> spec_json;
    const auto spec = parse_grid_spec(spec_json);

    const std::string corpus = spec_json.at("corpus").get<std::string>();
    const auto db = dpsu::load_corpus_file(
        corpus, resolve_format(corpus, spec_json.value("format", "")),
        spec_json.value("ngram", 1));

    const auto result = dpsu::run_grid(db, spec);
    std::ostringstream os;
    dpsu::emit_report(result, dpsu::ReportFormat::kJson, os);
    write_text(grid_out, os.str());
    if (!grid_csv.empty()) {
      std::ostringstream csv;
      dpsu::emit_report(result, dpsu::ReportFormat::kCsv, csv);
      write_text(grid_csv, csv.str());
    }
    if (!grid_markdown.empty()) {
      std::ostringstream md;
      dpsu::emit_report(result, dpsu::ReportFormat::kMarkdown, md);
      write_text(grid_markdown, md.str());
    }
  });

  // --- kanon ---------------------------------------------------------------
  auto* kanon_cmd =
      app.add_subcommand("kanon", "k-anonymity baseline sizes and release coverage");
  CorpusOptions kanon_corpus;
  kanon_corpus.attach(kanon_cmd);
  std::string kanon_released;
  std::vector<int> kanon_ks = {5, 10, 15, 20, 25};
  std::string kanon_out;
  kanon_cmd->add_option("--released", kanon_released,
                        "file of released items, one per line");
  kanon_cmd->add_option("--k", kanon_ks, "k values")->delimiter(',');
  kanon_cmd->add_option("--out", kanon_out, "output file (default: stdout)");
  kanon_cmd->callback([&] {
    const auto db = kanon_corpus.load();
    dpsu::ItemSet released;
    if (!kanon_released.empty()) {
      std::ifstream in(kanon_released);
      if (!in) throw std::runtime_error("cannot open released items: " + kanon_released);
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) released.insert(line);
      }
    }
    json rows = json::array();
    for (const int k : kanon_ks) {
      const auto result = dpsu::k_anonymity_baseline(db, k, released);
      json row{{"k", result.k}, {"size_sk", result.size_sk}};
      if (result.coverage) {
        row["coverage"] = *result.coverage;
      } else {
        row["coverage"] = nullptr;
      }
      rows.push_back(row);
    }
    write_text(kanon_out, rows.dump(2) + "\n");
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_main(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "dpsu: " << e.what() << '\n';
    return 1;
  }
}
