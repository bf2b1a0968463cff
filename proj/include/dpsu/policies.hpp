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
#include <stdexcept>
#include <utility>
#include <vector>

#include "dpsu/core.hpp"

namespace dpsu {

// How one user's item set updates the shared histogram. Every update only
// touches items in the user's set, never decreases a weight, and changes the
// histogram by at most `budget` in the policy's norm.
enum class PolicyKind {
  kCountL1,
  kCountL2,
  kWeightedL1,
  kWeightedL2,
  kL1Descent,
  kL2Descent,
  kGreedy,  // unbounded sensitivity; audit/demo use only
};

struct UpdatePolicy {
  PolicyKind kind = PolicyKind::kL1Descent;
  double gamma = 0.0;   // cutoff; used by the descent and greedy policies
  int delta0 = 1;       // used by the count policies
  double budget = 1.0;  // in (0,1]; < 1 only in multi-pass mode

  void validate() const {
    if (!(budget > 0.0) || budget > 1.0) {
      throw std::invalid_argument("policy budget must lie in (0, 1]");
    }
    const bool uses_gamma = kind == PolicyKind::kL1Descent ||
                            kind == PolicyKind::kL2Descent ||
                            kind == PolicyKind::kGreedy;
    if (uses_gamma && !(gamma > 0.0)) {
      throw std::invalid_argument("cutoff gamma must be positive for this policy");
    }
    if ((kind == PolicyKind::kCountL1 || kind == PolicyKind::kCountL2) && delta0 < 1) {
      throw std::invalid_argument("count policy requires delta0 >= 1");
    }
  }
};

namespace detail {

// Items of w strictly below the cutoff, as (gap, item) sorted ascending.
// The item id breaks gap ties so every policy is a total, deterministic
// function of its inputs.
inline std::vector<std::pair<double, Item>> gaps_below_cutoff(
    const WeightedHistogram& h, const ItemSet& w, double gamma) {
  std::vector<std::pair<double, Item>> gaps;
  gaps.reserve(w.size());
  for (const Item& u : w) {
    const double gap = gamma - h.get(u);
    if (gap > 0.0) gaps.emplace_back(gap, u);
  }
  std::sort(gaps.begin(), gaps.end());
  return gaps;
}

}  // namespace detail

// Water-filling: uniformly raises the below-cutoff items of w, freezing each
// item as it reaches the cutoff and splitting the rest of the budget among
// the remaining ones, until the budget is spent or everything is at the
// cutoff. Total l1 change <= budget; no weight ever exceeds gamma.
inline void l1_descent_update(WeightedHistogram& h, const ItemSet& w, double gamma,
                              double budget = 1.0) {
  if (w.empty()) throw std::invalid_argument("update requires a non-empty item set");
  auto gaps = detail::gaps_below_cutoff(h, w, gamma);
  if (gaps.empty()) return;

  // Find the final uniform raise level: item j gets min(gap_j, level).
  const std::size_t m = gaps.size();
  double level = gaps.back().first;
  double remaining = budget;
  double prev = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double step = gaps[j].first - prev;
    const double cost = step * static_cast<double>(m - j);
    if (cost <= remaining) {
      remaining -= cost;
      prev = gaps[j].first;
    } else {
      level = prev + remaining / static_cast<double>(m - j);
      break;
    }
  }

  for (const auto& [gap, u] : gaps) {
    if (gap <= level) {
      h.set(u, gamma);  // reached the cutoff exactly
    } else {
      h.set(u, std::min(h.get(u) + level, gamma));
    }
  }
}

// Moves H restricted to w towards the point (gamma, ..., gamma) by an l2
// distance of at most `budget`; if that point is closer than the budget the
// items are set to the cutoff directly. Gaps of items already at or above
// the cutoff are clamped to zero so the update never decreases a weight.
inline void l2_descent_update(WeightedHistogram& h, const ItemSet& w, double gamma,
                              double budget = 1.0) {
  if (w.empty()) throw std::invalid_argument("update requires a non-empty item set");
  double sq = 0.0;
  for (const Item& u : w) {
    const double gap = std::max(0.0, gamma - h.get(u));
    sq += gap * gap;
  }
  const double z = std::sqrt(sq);
  if (z < budget) {
    for (const Item& u : w) {
      if (h.get(u) < gamma) h.set(u, gamma);
    }
    return;
  }
  for (const Item& u : w) {
    const double gap = gamma - h.get(u);
    if (gap <= 0.0) continue;
    h.set(u, std::min(h.get(u) + budget * gap / z, gamma));
  }
}

// Independent weighted update: +budget/|w| per item (L1) or +budget/sqrt(|w|)
// (L2), so each user changes the histogram by exactly `budget` in the norm.
inline void weighted_update(WeightedHistogram& h, const ItemSet& w, Norm p,
                            double budget = 1.0) {
  if (w.empty()) throw std::invalid_argument("update requires a non-empty item set");
  const double n = static_cast<double>(w.size());
  const double inc = (p == Norm::kL1) ? budget / n : budget / std::sqrt(n);
  for (const Item& u : w) h.add(u, inc);
}

// Count baseline, rescaled: the raw +1 count divided by delta0 (L1) or
// sqrt(delta0) (L2) so that its sensitivity budget is 1 like every other
// policy and the shared calibration path applies unchanged. Users with
// |w| < delta0 under-use the budget, which is exactly the wastage the
// policy mechanisms remove.
inline void count_update(WeightedHistogram& h, const ItemSet& w, int delta0, Norm p,
                         double budget = 1.0) {
  if (w.empty()) throw std::invalid_argument("update requires a non-empty item set");
  if (delta0 < 1) throw std::invalid_argument("count update requires delta0 >= 1");
  if (w.size() > static_cast<std::size_t>(delta0)) {
    throw std::invalid_argument("count update requires |w| <= delta0 (cap the set first)");
  }
  const double d = static_cast<double>(delta0);
  const double inc = (p == Norm::kL1) ? budget / d : budget / std::sqrt(d);
  for (const Item& u : w) h.add(u, inc);
}

// Greedy: spends the budget on the items closest to the cutoff first. Not
// contractive -- neighboring histograms can diverge without bound -- so this
// policy is only reachable from the sensitivity lab and demo paths.
inline void greedy_update(WeightedHistogram& h, const ItemSet& w, double gamma,
                          double budget = 1.0) {
  if (w.empty()) throw std::invalid_argument("update requires a non-empty item set");
  auto gaps = detail::gaps_below_cutoff(h, w, gamma);
  double remaining = budget;
  for (const auto& [gap, u] : gaps) {
    if (remaining <= 0.0) break;
    if (gap <= remaining) {
      h.set(u, gamma);
      remaining -= gap;
    } else {
      h.add(u, remaining);
      remaining = 0.0;
    }
  }
}

// Applies one user's update under `policy`. The pipelines route every user
// through this single dispatch point.
inline void apply_update(WeightedHistogram& h, const ItemSet& w,
                         const UpdatePolicy& policy) {
  policy.validate();
  switch (policy.kind) {
    case PolicyKind::kCountL1:
      count_update(h, w, policy.delta0, Norm::kL1, policy.budget);
      return;
    case PolicyKind::kCountL2:
      count_update(h, w, policy.delta0, Norm::kL2, policy.budget);
      return;
    case PolicyKind::kWeightedL1:
      weighted_update(h, w, Norm::kL1, policy.budget);
      return;
    case PolicyKind::kWeightedL2:
      weighted_update(h, w, Norm::kL2, policy.budget);
      return;
    case PolicyKind::kL1Descent:
      l1_descent_update(h, w, policy.gamma, policy.budget);
      return;
    case PolicyKind::kL2Descent:
      l2_descent_update(h, w, policy.gamma, policy.budget);
      return;
    case PolicyKind::kGreedy:
      greedy_update(h, w, policy.gamma, policy.budget);
      return;
  }
  throw std::logic_error("unknown policy kind");
}

// The update policy a mechanism runs inside the histogram builder.
inline UpdatePolicy policy_for_mechanism(Mechanism mechanism, double gamma,
                                         int delta0) {
  UpdatePolicy policy;
  policy.gamma = gamma;
  policy.delta0 = delta0;
  switch (mechanism) {
    case Mechanism::kCountLaplace: policy.kind = PolicyKind::kCountL1; break;
    case Mechanism::kCountGaussian: policy.kind = PolicyKind::kCountL2; break;
    case Mechanism::kWeightedLaplace: policy.kind = PolicyKind::kWeightedL1; break;
    case Mechanism::kWeightedGaussian: policy.kind = PolicyKind::kWeightedL2; break;
    case Mechanism::kPolicyLaplace: policy.kind = PolicyKind::kL1Descent; break;
    case Mechanism::kPolicyGaussian: policy.kind = PolicyKind::kL2Descent; break;
    case Mechanism::kGreedyDemo: policy.kind = PolicyKind::kGreedy; break;
  }
  return policy;
}

// The norm in which a policy's budget is measured.
inline Norm policy_norm(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kCountL1:
    case PolicyKind::kWeightedL1:
    case PolicyKind::kL1Descent:
    case PolicyKind::kGreedy:
      return Norm::kL1;
    case PolicyKind::kCountL2:
    case PolicyKind::kWeightedL2:
    case PolicyKind::kL2Descent:
      return Norm::kL2;
  }
  throw std::logic_error("unknown policy kind");
}

inline Norm mechanism_norm(Mechanism m) {
  return is_laplace_family(m) || m == Mechanism::kGreedyDemo ? Norm::kL1 : Norm::kL2;
}

}  // namespace dpsu
