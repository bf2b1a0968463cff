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

#include <cstdint>
#include <string>
#include <string_view>

#include "dpsu/detail/hash.hpp"

namespace dpsu::detail {

// Deterministic, platform-independent stream RNG (splitmix64). Streams are
// keyed by hashing (seed, purpose tag, payload) so that independent parts of
// a run (ordering, capping, noise, synthesis) never share randomness.
class StreamRng {
 public:
  explicit StreamRng(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in the open interval (0, 1).
  double next_unit_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound) by rejection; unbiased for any bound > 0.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t stream_key(std::uint64_t seed, std::string_view tag,
                                std::string_view payload) {
  std::string buf;
  buf.reserve(tag.size() + 1 + payload.size());
  buf.append(tag);
  buf.push_back(':');
  buf.append(payload);
  return murmur3_128(buf, seed).hi;
}

inline StreamRng make_stream(std::uint64_t seed, std::string_view tag,
                             std::string_view payload) {
  return StreamRng(stream_key(seed, tag, payload));
}

// Single uniform (0,1) draw fully determined by (seed, tag, payload).
inline double unit_open_draw(std::uint64_t seed, std::string_view tag,
                             std::string_view payload) {
  StreamRng rng(stream_key(seed, tag, payload));
  return rng.next_unit_open();
}

}  // namespace dpsu::detail
