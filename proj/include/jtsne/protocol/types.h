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

#ifndef JTSNE_PROTOCOL_TYPES_H_
#define JTSNE_PROTOCOL_TYPES_H_

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "jtsne/aggregate/artifact.h"
#include "jtsne/common/matrix.h"
#include "jtsne/embedding/tsne.h"
#include "json.hpp"

namespace jtsne::protocol {

using aggregate::VisualizationMode;

// One participant's private points.
struct Dataset {
  std::string owner_id;
  RealMatrix points;  // N_p x m
  std::vector<std::optional<std::string>> labels;  // empty or N_p entries

  absl::Status Validate(size_t dims) const;
};

struct ParticipantSpec {
  std::string id;
  size_t count = 0;
  bool operator==(const ParticipantSpec&) const = default;
};

struct TaskConfig {
  std::string task_id;
  std::string title;
  std::string description;
  // Order fixes the global row order: participant 0's points first.
  std::vector<ParticipantSpec> participants;
  size_t dims = 0;
  embedding::TsneConfig tsne;
  int key_bits = 2048;
  int scale_bits = 24;
  // |x| <= value_bound for every input coordinate.
  double value_bound = 1e4;
  // Entry noise sigma is uniform on [-sigma_range, sigma_range] \ {0};
  // row noise eta is uniform on [0, eta_range]. Zero means "derive from
  // value_bound".
  double sigma_range = 0.0;
  double eta_range = 0.0;
  // Optional shared per-dimension [lo, hi] ranges. When set, every
  // participant maps x -> (x - lo) / (hi - lo) locally before encrypting,
  // and value_bound applies to the mapped values.
  std::vector<std::array<double, 2>> normalization;
  // Deterministic noise and permutation; test and audit runs only.
  std::optional<uint64_t> noise_seed;
  VisualizationMode mode = VisualizationMode::kDensity;

  size_t TotalPoints() const;
  // Applies `normalization` (identity when unset). Values outside a range
  // are rejected.
  absl::StatusOr<RealMatrix> Normalize(const RealMatrix& points) const;
  double EffectiveSigmaRange() const;
  double EffectiveEtaRange() const;

  // Field-level validation; every problem is listed in the message.
  absl::Status Validate() const;
  // 2 F^2 m (value_bound + sigma)^2 style headroom check against n / 2 for a
  // modulus of `key_bits` bits.
  absl::Status CheckOverflowBudget(int modulus_bits) const;

  nlohmann::json ToJson() const;
  static absl::StatusOr<TaskConfig> FromJson(const nlohmann::json& j);
};

// Secrets drawn by T. Never serialized off T; the audit harness reads it
// in-process.
struct NoiseLedger {
  // Entry noise at level 1, N x m signed integers, all non-zero.
  Matrix<mpz_class> sigma;
  // Row noise at level 2, non-negative integers.
  std::vector<mpz_class> eta;
  // W'[a][b] = W[pi[a]][pi[b]].
  std::vector<size_t> pi;

  mpz_class Delta(size_t i, size_t j, size_t k) const {
    return sigma(i, k) - sigma(j, k);
  }
  std::vector<size_t> InversePermutation() const;
};

// Conjugate permutation: out[a][b] = in[pi[a]][pi[b]].
template <typename T>
Matrix<T> ConjugatePermute(const Matrix<T>& in, const std::vector<size_t>& pi) {
  Matrix<T> out(in.rows(), in.cols());
  for (size_t a = 0; a < pi.size(); ++a) {
    for (size_t b = 0; b < pi.size(); ++b) out(a, b) = in(pi[a], pi[b]);
  }
  return out;
}

// Inverse of ConjugatePermute: out[pi[a]][pi[b]] = in[a][b].
template <typename T>
Matrix<T> ConjugateUnpermute(const Matrix<T>& in,
                             const std::vector<size_t>& pi) {
  Matrix<T> out(in.rows(), in.cols());
  for (size_t a = 0; a < pi.size(); ++a) {
    for (size_t b = 0; b < pi.size(); ++b) out(pi[a], pi[b]) = in(a, b);
  }
  return out;
}

bool IsPermutation(const std::vector<size_t>& pi);

}  // namespace jtsne::protocol

#endif  // JTSNE_PROTOCOL_TYPES_H_
