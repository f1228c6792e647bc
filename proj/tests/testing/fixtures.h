/*
 * Copyright 2026 The jtsne Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef JTSNE_TESTS_TESTING_FIXTURES_H_
#define JTSNE_TESTS_TESTING_FIXTURES_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "jtsne/ahe/paillier.h"
#include "jtsne/protocol/types.h"

namespace jtsne::testing {

// Points with coordinates k / 2^scale_bits in [0, 1), so every value is exact
// at the fixed-point scale and in double.
inline std::vector<protocol::Dataset> DyadicDatasets(
    const std::vector<std::pair<std::string, size_t>>& owners, size_t dims,
    uint64_t seed, int scale_bits = 24) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int64_t> dist(0, (int64_t{1} << scale_bits) - 1);
  std::vector<protocol::Dataset> out;
  for (const auto& [id, count] : owners) {
    protocol::Dataset d{id, RealMatrix(count, dims), {}};
    for (double& v : d.points.data()) {
      v = std::ldexp(static_cast<double>(dist(rng)), -scale_bits);
    }
    for (size_t i = 0; i < count; ++i) {
      d.labels.emplace_back(i % 2 ? "odd" : "even");
    }
    out.push_back(std::move(d));
  }
  return out;
}

inline protocol::TaskConfig SmallConfig(
    const std::vector<std::pair<std::string, size_t>>& owners, size_t dims,
    double perplexity, int iterations, uint64_t seed) {
  protocol::TaskConfig c;
  c.task_id = "test-task";
  for (const auto& [id, count] : owners) c.participants.push_back({id, count});
  c.dims = dims;
  c.key_bits = ahe::kTestKeyBits;
  c.value_bound = 1.0;
  c.tsne.perplexity = perplexity;
  c.tsne.iterations = iterations;
  c.tsne.init_seed = seed;
  c.noise_seed = seed;
  return c;
}

}  // namespace jtsne::testing

#endif  // JTSNE_TESTS_TESTING_FIXTURES_H_
