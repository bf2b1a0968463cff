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
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpsu/calibration.hpp"
#include "dpsu/core.hpp"
#include "dpsu/detail/rng.hpp"

namespace dpsu {

namespace detail {

inline bool looks_like_url(const std::string& lowered) {
  return lowered.find("http://") != std::string::npos ||
         lowered.find("https://") != std::string::npos ||
         lowered.find("ftp://") != std::string::npos ||
         lowered.rfind("www.", 0) == 0;
}

}  // namespace detail

// Self-contained preprocessing rule set: URL-shaped chunks are dropped
// whole, remaining characters outside [0-9A-Za-z] split words, letters are
// lowercased, and the set of contiguous n-grams (space-joined) is returned.
// The result may be empty; ingestion drops such records.
inline ItemSet tokenize(const std::string& text, int n = 1) {
  if (n < 1) throw std::invalid_argument("n-gram order must be >= 1");

  std::vector<std::string> words;
  std::istringstream chunks(text);
  std::string chunk;
  std::string current;
  while (chunks >> chunk) {
    std::string lowered = chunk;
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (detail::looks_like_url(lowered)) continue;
    current.clear();
    for (const char c : lowered) {
      if (std::isalnum(static_cast<unsigned char>(c))) {
        current.push_back(c);
      } else if (!current.empty()) {
        words.push_back(current);
        current.clear();
      }
    }
    if (!current.empty()) words.push_back(current);
  }

  ItemSet grams;
  if (words.size() < static_cast<std::size_t>(n)) return grams;
  for (std::size_t i = 0; i + n <= words.size(); ++i) {
    std::string gram = words[i];
    for (int j = 1; j < n; ++j) {
      gram.push_back(' ');
      gram.append(words[i + j]);
    }
    grams.insert(std::move(gram));
  }
  return grams;
}

enum class CorpusFormat { kJsonl, kTsv };

namespace detail {

inline void ingest_jsonl_line(const std::string& line, std::size_t line_no, int n,
                              std::map<std::string, ItemSet>& by_user) {
  nlohmann::json record;
  try {
    record = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("line " + std::to_string(line_no) +
                             ": invalid JSON: " + e.what());
  }
  if (!record.is_object() || !record.contains("user_id") ||
      !record["user_id"].is_string()) {
    throw std::runtime_error("line " + std::to_string(line_no) +
                             ": expected an object with a string \"user_id\"");
  }
  const bool has_text = record.contains("text");
  const bool has_items = record.contains("items");
  if (has_text == has_items) {
    throw std::runtime_error("line " + std::to_string(line_no) +
                             ": record must carry exactly one of \"text\"/\"items\"");
  }
  auto& items = by_user[record["user_id"].get<std::string>()];
  if (has_text) {
    if (!record["text"].is_string()) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": \"text\" must be a string");
    }
    const ItemSet grams = tokenize(record["text"].get<std::string>(), n);
    items.insert(grams.begin(), grams.end());
  } else {
    if (!record["items"].is_array()) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": \"items\" must be an array of strings");
    }
    for (const auto& item : record["items"]) {
      if (!item.is_string()) {
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": \"items\" must be an array of strings");
      }
      items.insert(item.get<std::string>());  // duplicates fold silently
    }
  }
}

inline void ingest_tsv_line(const std::string& line, std::size_t line_no,
                            std::map<std::string, ItemSet>& by_user) {
  const auto tab = line.find('\t');
  if (tab == std::string::npos) {
    throw std::runtime_error("line " + std::to_string(line_no) +
                             ": expected user_id<TAB>item1 item2 ...");
  }
  auto& items = by_user[line.substr(0, tab)];
  std::istringstream rest(line.substr(tab + 1));
  std::string item;
  while (rest >> item) items.insert(std::move(item));
}

}  // namespace detail

// Loads a corpus, grouping records by user and taking the union of each
// user's token sets across records. Users whose union ends up empty are
// dropped. The resulting database lists users in id order, so the output is
// independent of record order in the file.
inline Database load_corpus(std::istream& in, CorpusFormat format, int n = 1) {
  if (n < 1) throw std::invalid_argument("n-gram order must be >= 1");
  std::map<std::string, ItemSet> by_user;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (format == CorpusFormat::kJsonl) {
      detail::ingest_jsonl_line(line, line_no, n, by_user);
    } else {
      detail::ingest_tsv_line(line, line_no, by_user);
    }
  }
  Database db;
  db.users.reserve(by_user.size());
  for (auto& [user_id, items] : by_user) {
    if (items.empty()) continue;  // mirrors dropping empty posts
    db.users.push_back({user_id, std::move(items)});
  }
  return db;
}

inline Database load_corpus_file(const std::string& path, CorpusFormat format,
                                 int n = 1) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  return load_corpus(in, format, n);
}

// One user per line: user_id<TAB>item1 item2 ...
inline void write_corpus_tsv(const Database& db, std::ostream& out) {
  for (const auto& user : db.users) {
    out << user.user_id << '\t';
    bool first = true;
    for (const Item& item : user.items) {
      if (!first) out << ' ';
      out << item;
      first = false;
    }
    out << '\n';
  }
}

struct SynthSpec {
  int n_users = 0;
  int vocab_size = 1;
  double zipf_exponent = 1.0;
  // Set sizes are lognormal(mu, sigma), rounded and clipped to
  // [1, vocab_size]. The real corpus only pins percentile shapes, so the
  // analytic law is a modeling choice.
  double mu = 3.0;
  double sigma = 1.0;
  std::uint64_t seed = 0;
};

// Synthetic corpus with Zipf-distributed item popularity: item of rank r is
// selected with probability proportional to 1/r^exponent, and each user
// draws a lognormal set size then samples that many distinct items.
// Deterministic per seed; users have independent sub-streams.
inline Database synth_zipf_corpus(const SynthSpec& spec) {
  if (spec.n_users < 0) throw std::invalid_argument("n_users must be >= 0");
  if (spec.vocab_size < 1) throw std::invalid_argument("vocab_size must be >= 1");
  if (spec.sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");

  std::vector<double> cdf(spec.vocab_size);
  double total = 0.0;
  for (int r = 1; r <= spec.vocab_size; ++r) {
    total += std::pow(static_cast<double>(r), -spec.zipf_exponent);
    cdf[r - 1] = total;
  }
  for (double& c : cdf) c /= total;

  std::vector<std::string> vocab(spec.vocab_size);
  for (int r = 1; r <= spec.vocab_size; ++r) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "w%06d", r);
    vocab[r - 1] = buf;
  }

  Database db;
  db.users.reserve(spec.n_users);
  for (int i = 1; i <= spec.n_users; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "u%06d", i);
    auto rng = detail::make_stream(spec.seed, "synth", id);

    const double z = normal_quantile(rng.next_unit_open());
    const long long raw = std::llround(std::exp(spec.mu + spec.sigma * z));
    const int size = static_cast<int>(
        std::clamp<long long>(raw, 1, spec.vocab_size));

    ItemSet items;
    while (static_cast<int>(items.size()) < size) {
      const double u = rng.next_unit_open();
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
      const int rank = static_cast<int>(it - cdf.begin());
      items.insert(vocab[std::min(rank, spec.vocab_size - 1)]);
    }
    db.users.push_back({id, std::move(items)});
  }
  return db;
}

struct CorpusStats {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  // (rank, user count) sorted by count descending; rank 1 is the most held.
  std::vector<std::pair<std::size_t, std::size_t>> rank_frequency;
  // threshold T -> fraction of users with |W_i| <= T.
  std::map<std::size_t, double> set_size_percentiles;
  // Least squares slope of log(count) vs log(rank), negated, over ranks with
  // user count >= 2. NaN when fewer than two such ranks exist.
  double zipf_exponent_fit = std::numeric_limits<double>::quiet_NaN();
};

inline CorpusStats corpus_stats(const Database& db,
                                const std::vector<std::size_t>& extra_thresholds = {}) {
  CorpusStats stats;
  stats.n_users = db.users.size();

  std::map<Item, std::size_t> counts;
  for (const auto& user : db.users) {
    for (const Item& item : user.items) ++counts[item];
  }
  stats.n_items = counts.size();

  std::vector<std::pair<std::size_t, Item>> ranked;  // (count, item)
  ranked.reserve(counts.size());
  for (const auto& [item, count] : counts) ranked.emplace_back(count, item);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  stats.rank_frequency.reserve(ranked.size());
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    stats.rank_frequency.emplace_back(r + 1, ranked[r].first);
  }

  std::vector<std::size_t> thresholds = {1, 10, 50, 100, 300};
  thresholds.insert(thresholds.end(), extra_thresholds.begin(), extra_thresholds.end());
  for (const std::size_t t : thresholds) {
    std::size_t within = 0;
    for (const auto& user : db.users) {
      if (user.items.size() <= t) ++within;
    }
    stats.set_size_percentiles[t] =
        db.users.empty() ? 0.0 : static_cast<double>(within) / db.users.size();
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (const auto& [rank, count] : stats.rank_frequency) {
    if (count < 2) continue;
    const double x = std::log(static_cast<double>(rank));
    const double y = std::log(static_cast<double>(count));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m >= 2) {
    const double denom = m * sxx - sx * sx;
    if (denom > 0) stats.zipf_exponent_fit = -(m * sxy - sx * sy) / denom;
  }
  return stats;
}

struct KAnonymityResult {
  int k = 1;
  std::size_t size_sk = 0;         // items held by at least k users
  std::optional<double> coverage;  // |released| / |S_k|; absent when S_k is empty
};

inline KAnonymityResult k_anonymity_baseline(const Database& db, int k,
                                             const ItemSet& released) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::map<Item, std::size_t> counts;
  for (const auto& user : db.users) {
    for (const Item& item : user.items) ++counts[item];
  }
  KAnonymityResult result;
  result.k = k;
  for (const auto& [item, count] : counts) {
    if (count >= static_cast<std::size_t>(k)) ++result.size_sk;
  }
  if (result.size_sk > 0) {
    result.coverage = static_cast<double>(released.size()) / result.size_sk;
  }
  return result;
}

}  // namespace dpsu
