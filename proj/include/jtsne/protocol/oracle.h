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

#ifndef JTSNE_PROTOCOL_ORACLE_H_
#define JTSNE_PROTOCOL_ORACLE_H_

#include <gmpxx.h>

#include <vector>

#include "absl/status/statusor.h"
#include "jtsne/common/matrix.h"
#include "jtsne/embedding/affinities.h"
#include "jtsne/embedding/tsne.h"
#include "jtsne/protocol/types.h"

namespace jtsne::protocol {

// Everything the secure pipeline computes, computed in the clear.
struct OracleResult {
  Matrix<mpz_class> data_int;       // N x m, round(x * F)
  Matrix<mpz_class> distances_int;  // N x N, level-2 integers
  RealMatrix distances;             // distances_int / F^2
  embedding::Bandwidths bandwidths;
  embedding::ProbabilityMatrix p;
  embedding::TsneResult tsne;
};

// Stacks the datasets in roster order, normalized if the config asks for it.
absl::StatusOr<RealMatrix> StackDatasets(const std::vector<Dataset>& datasets,
                                         const TaskConfig& config);

// Fixed-point encodes the stacked data, brute-forces squared distances in
// integers, and runs the same affinity and t-SNE code as the protocol.
absl::StatusOr<OracleResult> RunPlaintextOracle(
    const std::vector<Dataset>& datasets, const TaskConfig& config,
    bool run_tsne = true);

}  // namespace jtsne::protocol

#endif  // JTSNE_PROTOCOL_ORACLE_H_
