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

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpsu {

// Items are opaque UTF-8 strings ordered bytewise; item sets are kept in
// that order so every traversal in the library is deterministic.
using Item = std::string;
using ItemSet = std::set<Item>;

// Single tolerance for budget/contraction checks. The water-filling loops
// accumulate rounding error of a few ulps per user; every "<= budget" style
// assertion in the library and its tests allows this slack.
inline constexpr double kEpsBudget = 1e-12;

enum class Norm { kL1, kL2 };

enum class Mechanism {
  kCountLaplace,
  kCountGaussian,
  kWeightedLaplace,
  kWeightedGaussian,
  kPolicyLaplace,
  kPolicyGaussian,
  kGreedyDemo,  // demonstration-only; refused by the release pipeline
};

inline bool is_laplace_family(Mechanism m) {
  return m == Mechanism::kCountLaplace || m == Mechanism::kWeightedLaplace ||
         m == Mechanism::kPolicyLaplace;
}

inline bool is_gaussian_family(Mechanism m) {
  return m == Mechanism::kCountGaussian || m == Mechanism::kWeightedGaussian ||
         m == Mechanism::kPolicyGaussian;
}

// Sparse weighted histogram over items. Absent items have weight 0; stored
// entries are strictly positive and finite.
class WeightedHistogram {
 public:
  WeightedHistogram() = default;

  double get(const Item& u) const {
    auto it = weights_.find(u);
    return it == weights_.end() ? 0.0 : it->second;
  }

  bool contains(const Item& u) const { return weights_.count(u) > 0; }

  // Sets the weight of u. Non-positive weights remove the entry so that the
  // stored support stays exactly {u : H[u] > 0}.
  void set(const Item& u, double w) {
    if (!std::isfinite(w)) {
      throw std::invalid_argument("histogram weight must be finite");
    }
    if (w > 0.0) {
      weights_[u] = w;
    } else {
      weights_.erase(u);
    }
  }

  // Adds delta >= 0 to the weight of u.
  void add(const Item& u, double delta) {
    if (!std::isfinite(delta) || delta < 0.0) {
      throw std::invalid_argument("histogram increment must be finite and >= 0");
    }
    if (delta > 0.0) {
      weights_[u] += delta;
    }
  }

  std::size_t support_size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }

  const std::map<Item, double>& weights() const { return weights_; }

  friend bool operator==(const WeightedHistogram&, const WeightedHistogram&) = default;

 private:
  std::map<Item, double> weights_;
};

struct UserRecord {
  std::string user_id;
  ItemSet items;

  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

// Ordered collection of users, each with a finite item set. User ids must be
// unique; pipelines that consume a Database validate this.
struct Database {
  std::vector<UserRecord> users;

  friend bool operator==(const Database&, const Database&) = default;
};

struct PrivacyParams {
  double epsilon = 0.0;
  double delta = 0.0;

  void validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw std::invalid_argument("epsilon must be positive and finite");
    }
    if (!(delta > 0.0) || !(delta < 1.0)) {
      throw std::invalid_argument("delta must lie in (0, 1)");
    }
  }
};

struct MechanismConfig {
  Mechanism mechanism = Mechanism::kPolicyGaussian;
  int delta0 = 1;          // max items contributed per user
  double alpha = 5.0;      // cutoff offset: gamma = rho + alpha * scale
  std::uint64_t seed = 0;  // drives ordering, capping and noise streams
  int passes = 1;
  bool experimental = false;  // must be set to run passes > 1
};

// lp distance over the union of supports: (sum |h1[u] - h2[u]|^p)^(1/p).
inline double lp_distance(const WeightedHistogram& h1, const WeightedHistogram& h2,
                          Norm p) {
  double acc = 0.0;
  auto it1 = h1.weights().begin();
  auto it2 = h2.weights().begin();
  const auto end1 = h1.weights().end();
  const auto end2 = h2.weights().end();
  auto consume = [&](double a, double b) {
    const double d = std::abs(a - b);
    acc += (p == Norm::kL1) ? d : d * d;
  };
  while (it1 != end1 && it2 != end2) {
    if (it1->first < it2->first) {
      consume(it1->second, 0.0);
      ++it1;
    } else if (it2->first < it1->first) {
      consume(0.0, it2->second);
      ++it2;
    } else {
      consume(it1->second, it2->second);
      ++it1;
      ++it2;
    }
  }
  for (; it1 != end1; ++it1) consume(it1->second, 0.0);
  for (; it2 != end2; ++it2) consume(0.0, it2->second);
  return (p == Norm::kL1) ? acc : std::sqrt(acc);
}

// True iff h1[u] >= h2[u] for every item in either support.
inline bool dominates(const WeightedHistogram& h1, const WeightedHistogram& h2) {
  for (const auto& [u, w] : h2.weights()) {
    if (h1.get(u) < w) return false;
  }
  // Entries only in h1 are >= 0 by construction.
  return true;
}

inline const char* mechanism_name(Mechanism m) {
  switch (m) {
    case Mechanism::kCountLaplace: return "count-laplace";
    case Mechanism::kCountGaussian: return "count-gaussian";
    case Mechanism::kWeightedLaplace: return "weighted-laplace";
    case Mechanism::kWeightedGaussian: return "weighted-gaussian";
    case Mechanism::kPolicyLaplace: return "policy-laplace";
    case Mechanism::kPolicyGaussian: return "policy-gaussian";
    case Mechanism::kGreedyDemo: return "greedy-demo";
  }
  throw std::logic_error("unknown mechanism");
}

inline Mechanism mechanism_from_name(const std::string& name) {
  if (name == "count-laplace") return Mechanism::kCountLaplace;
  if (name == "count-gaussian") return Mechanism::kCountGaussian;
  if (name == "weighted-laplace") return Mechanism::kWeightedLaplace;
  if (name == "weighted-gaussian") return Mechanism::kWeightedGaussian;
  if (name == "policy-laplace") return Mechanism::kPolicyLaplace;
  if (name == "policy-gaussian") return Mechanism::kPolicyGaussian;
  if (name == "greedy-demo") return Mechanism::kGreedyDemo;
  throw std::invalid_argument("unknown mechanism: " + name);
}

}  // namespace dpsu
