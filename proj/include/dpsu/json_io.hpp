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

#include <json.hpp>

#include "dpsu/calibration.hpp"
#include "dpsu/core.hpp"
#include "dpsu/ingestion.hpp"
#include "dpsu/release.hpp"
#include "dpsu/sensitivity_lab.hpp"

namespace dpsu {

inline nlohmann::json calibration_to_json(Mechanism mechanism,
                                          const PrivacyParams& params, int delta0,
                                          double alpha,
                                          const CalibrationResult& cal) {
  return nlohmann::json{
      {"mechanism", mechanism_name(mechanism)},
      {"epsilon", params.epsilon},
      {"delta", params.delta},
      {"delta0", delta0},
      {"alpha", alpha},
      {"scale", cal.scale},
      {"rho", cal.rho},
      {"gamma", cal.gamma},
  };
}

inline nlohmann::json release_report_to_json(const ReleaseReport& report) {
  nlohmann::json j;
  j["mechanism"] = mechanism_name(report.mechanism);
  j["epsilon"] = report.params.epsilon;
  j["delta"] = report.params.delta;
  j["delta0"] = report.config.delta0;
  j["alpha"] = report.config.alpha;
  j["seed"] = report.config.seed;
  j["passes"] = report.config.passes;
  j["calibration"] = {
      {"noise_kind", noise_kind_name(report.calibration.noise_kind)},
      {"scale", report.calibration.scale},
      {"rho", report.calibration.rho},
      {"gamma", report.calibration.gamma},
      {"tightened", report.calibration.tightened},
  };
  j["histogram_support_size"] = report.histogram_support_size;
  j["released_size"] = report.released_size;
  j["private"] = report.is_private;
  j["released"] = report.released;
  return j;
}

inline nlohmann::json corpus_stats_to_json(const CorpusStats& stats) {
  nlohmann::json j;
  j["n_users"] = stats.n_users;
  j["n_items"] = stats.n_items;
  if (std::isnan(stats.zipf_exponent_fit)) {
    j["zipf_exponent_fit"] = nullptr;
  } else {
    j["zipf_exponent_fit"] = stats.zipf_exponent_fit;
  }
  j["set_size_percentiles"] = nlohmann::json::object();
  for (const auto& [t, fraction] : stats.set_size_percentiles) {
    j["set_size_percentiles"][std::to_string(t)] = fraction;
  }
  j["rank_frequency"] = nlohmann::json::array();
  for (const auto& [rank, count] : stats.rank_frequency) {
    j["rank_frequency"].push_back({rank, count});
  }
  return j;
}

inline nlohmann::json neighbor_diff_to_json(const NeighborDiff& diff) {
  nlohmann::json j;
  j["removed_user"] = diff.removed_user;
  j["lp_gap"] = diff.lp_gap;
  j["lp_gap_full"] = diff.lp_gap_full;
  j["new_items"] = diff.new_items;
  j["max_new_item_weight"] = diff.max_new_item_weight;
  return j;
}

}  // namespace dpsu
