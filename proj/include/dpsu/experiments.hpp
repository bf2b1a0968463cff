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

#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dpsu/core.hpp"
#include "dpsu/release.hpp"
#include "dpsu/stats.hpp"

namespace dpsu {

// A grid of release runs: one cell per (mechanism, epsilon, delta0, alpha,
// passes) combination, each repeated over `shuffles` ordering seeds.
struct ExperimentSpec {
  std::vector<Mechanism> mechanisms;
  std::vector<double> epsilons;
  double delta = 0.0;
  std::vector<int> delta0s;
  std::vector<double> alphas;
  int shuffles = 5;  // seeds per cell
  std::vector<int> passes = {1};
  std::uint64_t base_seed = 0;
  // Spacing between shuffle seeds; 0 repeats the same seed, which pins every
  // shuffle to one permutation (harness self-checks only).
  std::uint64_t seed_stride = 1;
  bool experimental = false;  // required when passes include > 1

  void validate() const {
    if (mechanisms.empty() || epsilons.empty() || delta0s.empty() ||
        alphas.empty() || passes.empty()) {
      throw std::invalid_argument("experiment spec lists must be non-empty");
    }
    if (shuffles < 1) throw std::invalid_argument("shuffles must be >= 1");
  }
};

struct CellResult {
  Mechanism mechanism = Mechanism::kPolicyGaussian;
  double epsilon = 0.0;
  int delta0 = 1;
  double alpha = 0.0;
  int passes = 1;
  std::vector<std::size_t> sizes;  // released size per shuffle seed
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single shuffle
  std::string error;  // non-empty iff the cell failed

  bool failed() const { return !error.empty(); }
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<CellResult> cells;
};

namespace detail {

inline int worker_count(std::size_t n_cells) {
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (const char* env = std::getenv("DPSU_WORKERS")) {
    const int cap = std::atoi(env);
    if (cap >= 1 && cap < workers) workers = cap;
  }
  if (static_cast<std::size_t>(workers) > n_cells && n_cells > 0) {
    workers = static_cast<int>(n_cells);
  }
  return workers;
}

inline void finish_cell(CellResult& cell) {
  double sum = 0.0;
  for (const std::size_t s : cell.sizes) sum += static_cast<double>(s);
  cell.mean = cell.sizes.empty() ? 0.0 : sum / cell.sizes.size();
  if (cell.sizes.size() >= 2) {
    double sq = 0.0;
    for (const std::size_t s : cell.sizes) {
      const double d = static_cast<double>(s) - cell.mean;
      sq += d * d;
    }
    cell.sd = std::sqrt(sq / (cell.sizes.size() - 1));
  }
}

}  // namespace detail

// Runs the whole grid. "Shuffling the user order" is realized by varying the
// ordering-hash seed: seed_j = base_seed + j for shuffle j, shared across
// cells so every cell sees the same five permutations. Cells run in parallel
// up to DPSU_WORKERS; a cell failure is recorded in-place and the grid
// continues. Output is deterministic regardless of scheduling.
inline ExperimentResult run_grid(const Database& db, const ExperimentSpec& spec) {
  spec.validate();
  ExperimentResult result;
  result.spec = spec;
  for (const Mechanism mechanism : spec.mechanisms) {
    for (const double epsilon : spec.epsilons) {
      for (const int delta0 : spec.delta0s) {
        for (const double alpha : spec.alphas) {
          for (const int pass_count : spec.passes) {
            CellResult cell;
            cell.mechanism = mechanism;
            cell.epsilon = epsilon;
            cell.delta0 = delta0;
            cell.alpha = alpha;
            cell.passes = pass_count;
            result.cells.push_back(std::move(cell));
          }
        }
      }
    }
  }

  std::atomic<std::size_t> next{0};
  const int workers = detail::worker_count(result.cells.size());
  auto work = [&]() {
    for (std::size_t i = next.fetch_add(1); i < result.cells.size();
         i = next.fetch_add(1)) {
      CellResult& cell = result.cells[i];
      try {
        MechanismConfig config;
        config.mechanism = cell.mechanism;
        config.delta0 = cell.delta0;
        config.alpha = cell.alpha;
        config.passes = cell.passes;
        config.experimental = spec.experimental;
        const PrivacyParams params{cell.epsilon, spec.delta};
        for (int j = 0; j < spec.shuffles; ++j) {
          config.seed = spec.base_seed + static_cast<std::uint64_t>(j) * spec.seed_stride;
          cell.sizes.push_back(run_dpsu(db, config, params).released_size);
        }
        detail::finish_cell(cell);
      } catch (const std::exception& e) {
        cell.error = e.what();
        cell.sizes.clear();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  return result;
}

struct PassComparison {
  Mechanism mechanism = Mechanism::kPolicyGaussian;
  double epsilon = 0.0;
  int delta0 = 1;
  double alpha = 0.0;
  CellResult single_pass;
  CellResult double_pass;
  WelchResult test;
};

// Single- vs multi-pass comparison: runs the grid with passes = {1, 2} and
// reports a Welch two-sided t-test per remaining cell coordinate.
inline std::vector<PassComparison> compare_passes(const Database& db,
                                                  ExperimentSpec spec) {
  if (spec.shuffles < 2) {
    throw std::invalid_argument("pass comparison needs shuffles >= 2 for a t-test");
  }
  spec.passes = {1, 2};
  spec.experimental = true;
  const ExperimentResult result = run_grid(db, spec);

  std::map<std::tuple<Mechanism, double, int, double>, PassComparison> by_key;
  for (const CellResult& cell : result.cells) {
    auto& cmp = by_key[{cell.mechanism, cell.epsilon, cell.delta0, cell.alpha}];
    cmp.mechanism = cell.mechanism;
    cmp.epsilon = cell.epsilon;
    cmp.delta0 = cell.delta0;
    cmp.alpha = cell.alpha;
    (cell.passes == 1 ? cmp.single_pass : cmp.double_pass) = cell;
  }

  std::vector<PassComparison> comparisons;
  comparisons.reserve(by_key.size());
  for (auto& [key, cmp] : by_key) {
    if (!cmp.single_pass.failed() && !cmp.double_pass.failed()) {
      std::vector<double> a(cmp.single_pass.sizes.begin(), cmp.single_pass.sizes.end());
      std::vector<double> b(cmp.double_pass.sizes.begin(), cmp.double_pass.sizes.end());
      cmp.test = welch_t_test(a, b);
    }
    comparisons.push_back(std::move(cmp));
  }
  return comparisons;
}

enum class ReportFormat { kJson, kMarkdown, kCsv };

namespace detail {

inline nlohmann::json cell_to_json(const CellResult& cell) {
  nlohmann::json j{
      {"mechanism", mechanism_name(cell.mechanism)},
      {"epsilon", cell.epsilon},
      {"delta0", cell.delta0},
      {"alpha", cell.alpha},
      {"passes", cell.passes},
      {"sizes", cell.sizes},
      {"mean", cell.mean},
      {"sd", cell.sd},
  };
  if (cell.failed()) j["error"] = cell.error;
  return j;
}

inline std::string format_mean_sd(const CellResult& cell) {
  if (cell.failed()) return "error";
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << cell.mean << " ± " << cell.sd;
  return os.str();
}

}  // namespace detail

// Writes the grid in one of three shapes: a flat JSON dump, a flat CSV
// (mechanism, epsilon, delta0, alpha, passes, mean, sd), or Markdown tables
// -- one mechanisms-by-delta0 grid per (epsilon, alpha, passes) plus an
// epsilon series per mechanism when the sweep has several epsilons.
inline void emit_report(const ExperimentResult& result, ReportFormat format,
                        std::ostream& out) {
  if (format == ReportFormat::kJson) {
    nlohmann::json j;
    j["delta"] = result.spec.delta;
    j["shuffles"] = result.spec.shuffles;
    j["base_seed"] = result.spec.base_seed;
    j["cells"] = nlohmann::json::array();
    for (const CellResult& cell : result.cells) {
      j["cells"].push_back(detail::cell_to_json(cell));
    }
    out << j.dump(2) << '\n';
    return;
  }

  if (format == ReportFormat::kCsv) {
    out << "mechanism,epsilon,delta0,alpha,passes,mean,sd\n";
    for (const CellResult& cell : result.cells) {
      out << mechanism_name(cell.mechanism) << ',' << cell.epsilon << ','
          << cell.delta0 << ',' << cell.alpha << ',' << cell.passes << ',';
      if (cell.failed()) {
        out << ',';
      } else {
        out << cell.mean << ',' << cell.sd;
      }
      out << '\n';
    }
    return;
  }

  // Markdown. Index cells for the two table shapes.
  std::map<std::tuple<double, double, int>,
           std::map<std::pair<Mechanism, int>, const CellResult*>>
      grids;  // (eps, alpha, passes) -> (mechanism, delta0) -> cell
  for (const CellResult& cell : result.cells) {
    grids[{cell.epsilon, cell.alpha, cell.passes}][{cell.mechanism, cell.delta0}] =
        &cell;
  }
  for (const auto& [key, cells] : grids) {
    const auto& [epsilon, alpha, pass_count] = key;
    out << "## epsilon=" << epsilon << " alpha=" << alpha
        << " passes=" << pass_count << "\n\n";
    out << "| mechanism |";
    for (const int delta0 : result.spec.delta0s) out << " Δ0=" << delta0 << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < result.spec.delta0s.size(); ++i) out << "---|";
    out << '\n';
    for (const Mechanism mechanism : result.spec.mechanisms) {
      out << "| " << mechanism_name(mechanism) << " |";
      for (const int delta0 : result.spec.delta0s) {
        const auto it = cells.find({mechanism, delta0});
        out << ' ' << (it == cells.end() ? "-" : detail::format_mean_sd(*it->second))
            << " |";
      }
      out << '\n';
    }
    out << '\n';
  }

  if (result.spec.epsilons.size() > 1) {
    out << "## released size vs epsilon\n\n";
    out << "| mechanism | delta0 | alpha | passes |";
    for (const double epsilon : result.spec.epsilons) out << " ε=" << epsilon << " |";
    out << "\n|---|---|---|---|";
    for (std::size_t i = 0; i < result.spec.epsilons.size(); ++i) out << "---|";
    out << '\n';
    std::map<std::tuple<Mechanism, int, double, int>,
             std::map<double, const CellResult*>>
        series;
    for (const CellResult& cell : result.cells) {
      series[{cell.mechanism, cell.delta0, cell.alpha, cell.passes}][cell.epsilon] =
          &cell;
    }
    for (const auto& [key, row] : series) {
      const auto& [mechanism, delta0, alpha, pass_count] = key;
      out << "| " << mechanism_name(mechanism) << " | " << delta0 << " | " << alpha
          << " | " << pass_count << " |";
      for (const double epsilon : result.spec.epsilons) {
        const auto it = row.find(epsilon);
        out << ' ' << (it == row.end() ? "-" : detail::format_mean_sd(*it->second))
            << " |";
      }
      out << '\n';
    }
    out << '\n';
  }
}

}  // namespace dpsu
