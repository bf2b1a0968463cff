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
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "dpsu/core.hpp"
#include "dpsu/detail/hash.hpp"
#include "dpsu/detail/rng.hpp"
#include "dpsu/policies.hpp"

namespace dpsu {

// Users sorted by the keyed hash of their ids under the run seed. The
// permutation depends only on (seed, set of user ids), never on input order.
struct OrderedDatabase {
  std::vector<UserRecord> users;
};

namespace detail {

inline void check_unique_user_ids(const Database& db) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(db.users.size());
  for (const auto& user : db.users) {
    if (!seen.insert(user.user_id).second) {
      throw std::invalid_argument("duplicate user id: " + user.user_id);
    }
  }
}

}  // namespace detail

// Hash-orders the users. Ties on the (astronomically unlikely) full 128-bit
// collision fall back to bytewise user id order, keeping the order total.
inline OrderedDatabase order_users(const Database& db, std::uint64_t seed) {
  detail::check_unique_user_ids(db);
  struct Keyed {
    detail::Hash128 key;
    const UserRecord* user;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(db.users.size());
  for (const auto& user : db.users) {
    keyed.push_back({detail::murmur3_128(user.user_id, seed), &user});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.user->user_id < b.user->user_id;
  });
  OrderedDatabase ordered;
  ordered.users.reserve(keyed.size());
  for (const auto& k : keyed) ordered.users.push_back(*k.user);
  return ordered;
}

// Caps a user's set to delta0 items, sampling a uniform subset when the set
// is larger. The sample is driven by a sub-stream keyed on (seed, user id)
// only, so a user's contributed subset never changes when other users are
// added or removed -- the coupling the sensitivity analysis relies on.
inline ItemSet cap_user_set(const ItemSet& w, int delta0, const std::string& user_id,
                            std::uint64_t seed) {
  if (delta0 < 1) throw std::invalid_argument("delta0 must be >= 1");
  if (w.size() <= static_cast<std::size_t>(delta0)) return w;

  std::vector<const Item*> pool;
  pool.reserve(w.size());
  for (const Item& u : w) pool.push_back(&u);

  auto rng = detail::make_stream(seed, "cap", user_id);
  ItemSet chosen;
  // Partial Fisher-Yates: the first delta0 slots are a uniform subset.
  for (int i = 0; i < delta0; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.next_below(pool.size() - i));
    std::swap(pool[i], pool[j]);
    chosen.insert(*pool[i]);
  }
  return chosen;
}

namespace detail {

// Sequentially applies one policy update per user in the given order; the
// shared inner loop of build_histogram and of the lab's forced-order runs.
// With passes > 1 the sequence repeats and each update gets budget/passes.
inline WeightedHistogram run_update_sequence(const std::vector<UserRecord>& ordered,
                                             const MechanismConfig& config,
                                             UpdatePolicy policy) {
  if (config.delta0 < 1) throw std::invalid_argument("delta0 must be >= 1");
  if (config.passes < 1) throw std::invalid_argument("passes must be >= 1");
  policy.delta0 = config.delta0;
  policy.budget /= static_cast<double>(config.passes);

  WeightedHistogram h;
  for (int pass = 0; pass < config.passes; ++pass) {
    for (const auto& user : ordered) {
      if (user.items.empty()) {
        throw std::invalid_argument("user with empty item set: " + user.user_id);
      }
      const ItemSet capped =
          cap_user_set(user.items, config.delta0, user.user_id, config.seed);
      apply_update(h, capped, policy);
    }
  }
  return h;
}

}  // namespace detail

// Builds the weighted histogram: hash-order the users, cap each set to
// delta0 items, then apply one policy update per user in that order.
// Deterministic for fixed (db, config, policy).
inline WeightedHistogram build_histogram(const Database& db,
                                         const MechanismConfig& config,
                                         const UpdatePolicy& policy) {
  OrderedDatabase ordered = order_users(db, config.seed);
  return detail::run_update_sequence(ordered.users, config, policy);
}

}  // namespace dpsu
