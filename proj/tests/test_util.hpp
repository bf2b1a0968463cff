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

#include <cstdio>
#include <string>
#include <vector>

#include "dpsu/core.hpp"
#include "dpsu/detail/rng.hpp"

namespace dpsu_test {

inline dpsu::WeightedHistogram histogram_of(
    std::initializer_list<std::pair<const char*, double>> entries) {
  dpsu::WeightedHistogram h;
  for (const auto& [item, weight] : entries) h.set(item, weight);
  return h;
}

inline dpsu::WeightedHistogram random_histogram(dpsu::detail::StreamRng& rng,
                                                int max_items = 8,
                                                double max_weight = 10.0) {
  dpsu::WeightedHistogram h;
  const int n = static_cast<int>(rng.next_below(max_items + 1));
  for (int i = 0; i < n; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "i%02d", static_cast<int>(rng.next_below(12)));
    h.set(buf, rng.next_unit_open() * max_weight);
  }
  return h;
}

// Small random database on a Zipf-flavored vocabulary, for property tests.
inline dpsu::Database random_database(std::uint64_t seed, int max_users = 50,
                                      int n_items = 30) {
  auto rng = dpsu::detail::make_stream(seed, "test", "db");
  dpsu::Database db;
  const int n_users = 2 + static_cast<int>(rng.next_below(max_users - 1));
  for (int i = 0; i < n_users; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "user%03d", i);
    dpsu::ItemSet items;
    const int size = 1 + static_cast<int>(rng.next_below(8));
    while (static_cast<int>(items.size()) < size) {
      // Skewed item choice: lower-numbered items more common.
      const double u = rng.next_unit_open();
      const int item = static_cast<int>(u * u * n_items);
      char buf[16];
      std::snprintf(buf, sizeof buf, "item%03d", item);
      items.insert(buf);
    }
    db.users.push_back({id, std::move(items)});
  }
  return db;
}

}  // namespace dpsu_test
