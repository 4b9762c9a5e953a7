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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ackmmea/error.hpp"
#include "ackmmea/kg.hpp"
#include "ackmmea/random.hpp"

namespace ackmmea {

using SeedPair = std::pair<EntityId, EntityId>;

// Known equivalent pairs (left in KG1, right in KG2) and a train/test split
// over their indices. An unsplit set has every index in `test`.
struct AlignmentSeedSet {
  std::vector<SeedPair> pairs;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  static AlignmentSeedSet unsplit(std::vector<SeedPair> pairs) {
    AlignmentSeedSet s;
    s.test.resize(pairs.size());
    std::iota(s.test.begin(), s.test.end(), std::size_t{0});
    s.pairs = std::move(pairs);
    return s;
  }

  std::vector<SeedPair> train_pairs() const { return select(train); }
  std::vector<SeedPair> test_pairs() const { return select(test); }

  bool operator==(const AlignmentSeedSet&) const = default;

 private:
  std::vector<SeedPair> select(const std::vector<std::size_t>& idx) const {
    std::vector<SeedPair> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(pairs.at(i));
    return out;
  }
};

// Checks pair uniqueness, one-to-one sides and that train/test partition the
// pair indices. Returns a list of problems; empty when consistent.
inline std::vector<std::string> check_seeds(const AlignmentSeedSet& s) {
  std::vector<std::string> problems;
  std::set<EntityId> left, right;
  for (const auto& [l, r] : s.pairs) {
    if (!left.insert(l).second) problems.push_back("left entity " + std::to_string(l) + " repeats");
    if (!right.insert(r).second) problems.push_back("right entity " + std::to_string(r) + " repeats");
  }
  std::vector<int> hits(s.pairs.size(), 0);
  for (const auto* part : {&s.train, &s.test}) {
    for (std::size_t i : *part) {
      if (i >= s.pairs.size()) {
        problems.push_back("split index " + std::to_string(i) + " out of range");
      } else {
        ++hits[i];
      }
    }
  }
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i] != 1) {
      problems.push_back("pair " + std::to_string(i) + " appears " + std::to_string(hits[i]) +
                         " times across train/test");
    }
  }
  return problems;
}

// |train| = floor(fraction * |pairs|); membership is a seeded shuffle.
// Both index lists are returned in ascending order.
inline AlignmentSeedSet split_seeds(const AlignmentSeedSet& seeds, double train_fraction,
                                    std::uint64_t rng_seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie in (0,1), got " + std::to_string(train_fraction));
  }
  const std::size_t n = seeds.pairs.size();
  // The tiny epsilon keeps e.g. 0.2*10 from flooring to 1 through rounding.
  const auto n_train =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 1e-9));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(rng_seed, "split");
  std::shuffle(order.begin(), order.end(), rng);

  AlignmentSeedSet out;
  out.pairs = seeds.pairs;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace ackmmea
