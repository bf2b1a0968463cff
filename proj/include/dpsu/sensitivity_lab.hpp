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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpsu/builder.hpp"
#include "dpsu/calibration.hpp"
#include "dpsu/core.hpp"
#include "dpsu/detail/rng.hpp"
#include "dpsu/policies.hpp"

namespace dpsu {

// One neighboring-database comparison: the histogram with all users against
// the histogram with `removed_user` deleted, built under the same seed so
// the remaining users keep their hash order and capped sets.
struct NeighborDiff {
  std::string removed_user;
  WeightedHistogram h_full;
  WeightedHistogram h_minus;
  ItemSet new_items;  // supp(h_full) \ supp(h_minus)
  double lp_gap = 0.0;       // distance restricted to supp(h_minus)
  double lp_gap_full = 0.0;  // distance over the union of supports
  double max_new_item_weight = 0.0;
};

struct SensitivityReport {
  double max_gap = 0.0;
  NeighborDiff worst;
  std::vector<NeighborDiff> diffs;
};

namespace detail {

inline double lp_distance_restricted(const WeightedHistogram& h1,
                                     const WeightedHistogram& h2, Norm p) {
  double acc = 0.0;
  for (const auto& [u, w2] : h2.weights()) {
    const double d = std::abs(h1.get(u) - w2);
    acc += (p == Norm::kL1) ? d : d * d;
  }
  return (p == Norm::kL1) ? acc : std::sqrt(acc);
}

inline NeighborDiff neighbor_diff(const WeightedHistogram& h_full,
                                  const WeightedHistogram& h_minus,
                                  const std::string& removed_user, Norm p) {
  NeighborDiff diff;
  diff.removed_user = removed_user;
  diff.h_full = h_full;
  diff.h_minus = h_minus;
  diff.lp_gap = lp_distance_restricted(h_full, h_minus, p);
  diff.lp_gap_full = lp_distance(h_full, h_minus, p);
  for (const auto& [u, w] : h_full.weights()) {
    if (!h_minus.contains(u)) {
      diff.new_items.insert(diff.new_items.end(), u);
      diff.max_new_item_weight = std::max(diff.max_new_item_weight, w);
    }
  }
  return diff;
}

}  // namespace detail

// Measures the realized sensitivity of the histogram builder: rebuilds with
// each chosen user deleted (same seed) and reports the largest lp distance
// restricted to the smaller support, together with the per-diff new-item
// weights that the threshold analysis bounds by lead(|T|).
// sample_k = 0 deletes every user in turn; sample_k > 0 deletes a random
// subset of that size.
inline SensitivityReport empirical_sensitivity(const Database& db,
                                               const MechanismConfig& config,
                                               const UpdatePolicy& policy, Norm p,
                                               int sample_k = 0) {
  if (db.users.size() < 2) {
    throw std::invalid_argument("empirical sensitivity requires at least 2 users");
  }
  const WeightedHistogram h_full = build_histogram(db, config, policy);

  std::vector<std::size_t> indices;
  if (sample_k <= 0 || static_cast<std::size_t>(sample_k) >= db.users.size()) {
    indices.resize(db.users.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  } else {
    std::vector<std::size_t> pool(db.users.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    auto rng = detail::make_stream(config.seed, "lab", "sample");
    for (int i = 0; i < sample_k; ++i) {
      const std::size_t j =
          i + static_cast<std::size_t>(rng.next_below(pool.size() - i));
      std::swap(pool[i], pool[j]);
      indices.push_back(pool[i]);
    }
  }

  SensitivityReport report;
  for (std::size_t idx : indices) {
    Database minus;
    minus.users.reserve(db.users.size() - 1);
    for (std::size_t j = 0; j < db.users.size(); ++j) {
      if (j != idx) minus.users.push_back(db.users[j]);
    }
    const WeightedHistogram h_minus = build_histogram(minus, config, policy);
    NeighborDiff diff =
        detail::neighbor_diff(h_full, h_minus, db.users[idx].user_id, p);
    if (diff.lp_gap >= report.max_gap) {
      report.max_gap = diff.lp_gap;
      report.worst = diff;
    }
    report.diffs.push_back(std::move(diff));
  }
  return report;
}

struct ContractionTrialConfig {
  double gamma = 5.0;
  int max_set_size = 4;    // |w| is drawn from 1..max_set_size
  int pool_size = 10;      // histogram supports are subsets of this pool
};

struct ContractionTrialResult {
  bool pass = false;
  double dist_before = 0.0;
  double dist_after = 0.0;
  WeightedHistogram h1_before, h2_before;
  WeightedHistogram h1_after, h2_after;
  ItemSet w;
};

// One randomized check of the policy's invariant set. Generates a pair of
// histograms inside the invariant set (for the l1 family: H1 >= H2 pointwise
// at l1 distance <= 1; for l2: l2 distance <= 1), applies the policy to both
// with the same item set, and reports whether the pair stayed inside.
// Supports cover both near-cutoff and far-from-cutoff regimes: weights are
// uniform in [0, gamma], and the difference is a random direction on the
// lp sphere scaled by a uniform radius.
inline ContractionTrialResult contraction_trial(PolicyKind policy, Norm p,
                                                std::uint64_t rng_seed,
                                                const ContractionTrialConfig& cfg = {}) {
  if (policy != PolicyKind::kL1Descent && policy != PolicyKind::kL2Descent &&
      policy != PolicyKind::kGreedy) {
    throw std::invalid_argument("contraction trials cover the descent and greedy policies");
  }
  auto rng = detail::make_stream(rng_seed, "lab", "contraction");

  std::vector<Item> pool;
  for (int i = 0; i < cfg.pool_size; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "i%02d", i);
    pool.emplace_back(buf);
  }

  ContractionTrialResult trial;

  // Base histogram on a random sub-support.
  WeightedHistogram h2;
  for (const Item& u : pool) {
    if (rng.next_unit_open() < 0.5) h2.set(u, rng.next_unit_open() * cfg.gamma);
  }

  // Difference on the lp sphere, scaled by a uniform radius <= 1.
  const double radius = rng.next_unit_open();
  std::vector<double> dir(pool.size());
  double norm = 0.0;
  for (std::size_t j = 0; j < pool.size(); ++j) {
    if (p == Norm::kL1) {
      dir[j] = -std::log(rng.next_unit_open());  // exponential: nonneg direction
      norm += dir[j];
    } else {
      dir[j] = normal_quantile(rng.next_unit_open());
      norm += dir[j] * dir[j];
    }
  }
  norm = (p == Norm::kL1) ? norm : std::sqrt(norm);

  WeightedHistogram h1 = h2;
  for (std::size_t j = 0; j < pool.size(); ++j) {
    const double delta = radius * dir[j] / norm;
    // Clamping at zero only shrinks the difference, so the pair stays in
    // the invariant set.
    h1.set(pool[j], std::max(0.0, h1.get(pool[j]) + delta));
  }

  // Random non-empty update set from the pool.
  const int set_size = 1 + static_cast<int>(rng.next_below(cfg.max_set_size));
  std::vector<const Item*> shuffled;
  for (const Item& u : pool) shuffled.push_back(&u);
  for (int i = 0; i < set_size; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(shuffled.size() - i));
    std::swap(shuffled[i], shuffled[j]);
    trial.w.insert(*shuffled[i]);
  }

  trial.h1_before = h1;
  trial.h2_before = h2;
  trial.dist_before = lp_distance(h1, h2, p);

  UpdatePolicy update{policy, cfg.gamma, cfg.max_set_size, 1.0};
  apply_update(h1, trial.w, update);
  apply_update(h2, trial.w, update);

  trial.h1_after = h1;
  trial.h2_after = h2;
  trial.dist_after = lp_distance(h1, h2, p);

  if (p == Norm::kL1) {
    trial.pass = dominates(h1, h2) && trial.dist_after <= 1.0 + kEpsBudget;
  } else {
    trial.pass = trial.dist_after <= trial.dist_before + kEpsBudget;
  }
  return trial;
}

struct GreedyBlowup {
  double l1_gap = 0.0;
  NeighborDiff trace;
};

// Reproduces the unbounded-sensitivity construction for the greedy policy:
// one seed user puts item u2 one unit ahead of u1, the disputed user (at
// forced position i) holds {u1} alone, and every later user holds {u1, u2}.
// With the disputed user present the followers all pile onto u1; without
// them they pile onto u2, so the l1 gap grows as 1 + 2(n - i).
//
// The construction pins the user order explicitly (the argument is order-
// specific) and relies on the deterministic gap tie-break: after the
// disputed user, u1 and u2 are exactly tied and u1 wins by item id.
inline GreedyBlowup greedy_counterexample(int n, int i, double gamma) {
  if (i < 1 || i > n) throw std::invalid_argument("need 1 <= i <= n");
  if (!(gamma > n + 2)) {
    throw std::invalid_argument("gamma must exceed n + 2 so no weight saturates");
  }

  std::vector<UserRecord> ordered;
  ordered.reserve(n);
  for (int k = 1; k < i; ++k) {
    char id[16];
    std::snprintf(id, sizeof id, "s%04d", k);
    if (k == 1) {
      ordered.push_back({id, {"u2"}});
    } else {
      char filler[16];
      std::snprintf(filler, sizeof filler, "f%04d", k);
      ordered.push_back({id, {filler}});
    }
  }
  ordered.push_back({"target", {"u1"}});
  for (int k = i + 1; k <= n; ++k) {
    char id[16];
    std::snprintf(id, sizeof id, "g%04d", k);
    ordered.push_back({id, {"u1", "u2"}});
  }

  MechanismConfig config;
  config.mechanism = Mechanism::kGreedyDemo;
  config.delta0 = 2;
  config.seed = 0;

  const UpdatePolicy policy{PolicyKind::kGreedy, gamma, 2, 1.0};
  const WeightedHistogram h_full = detail::run_update_sequence(ordered, config, policy);

  std::vector<UserRecord> without;
  for (const auto& user : ordered) {
    if (user.user_id != "target") without.push_back(user);
  }
  const WeightedHistogram h_minus = detail::run_update_sequence(without, config, policy);

  GreedyBlowup result;
  result.trace = detail::neighbor_diff(h_full, h_minus, "target", Norm::kL1);
  result.l1_gap = lp_distance(h_full, h_minus, Norm::kL1);
  return result;
}

}  // namespace dpsu
