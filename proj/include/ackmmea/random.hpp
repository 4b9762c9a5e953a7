// Copyright 2026 The ackmmea Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace ackmmea {

using Rng = std::mt19937_64;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Named random sub-streams. Every stochastic stage derives its generator from
// (run seed, stream name, integer keys) so any stage can be replayed alone.
inline std::uint64_t stream_seed(std::uint64_t seed, std::string_view stream,
                                 std::initializer_list<std::uint64_t> keys = {}) {
  std::uint64_t h = detail::splitmix64(seed);
  for (char c : stream) {
    h = detail::splitmix64(h ^ static_cast<unsigned char>(c));
  }
  for (std::uint64_t k : keys) {
    h = detail::splitmix64(h ^ k);
  }
  return h;
}

inline Rng make_rng(std::uint64_t seed, std::string_view stream,
                    std::initializer_list<std::uint64_t> keys = {}) {
  return Rng(stream_seed(seed, stream, keys));
}

}  // namespace ackmmea
