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

#ifndef JTSNE_PROTOCOL_DRIVER_H_
#define JTSNE_PROTOCOL_DRIVER_H_

#include <gmpxx.h>

#include <array>
#include <optional>
#include <vector>

#include "absl/status/statusor.h"
#include "jtsne/aggregate/artifact.h"
#include "jtsne/ahe/paillier.h"
#include "jtsne/embedding/tsne.h"
#include "jtsne/protocol/roles.h"
#include "jtsne/protocol/transcript.h"
#include "jtsne/protocol/types.h"

namespace jtsne::protocol {

struct LocalRunOptions {
  bool audit = true;
  FaultInjection faults;
  // Reuse an existing key pair instead of generating one in step 1.
  std::optional<ahe::KeyPair> keys;
};

// Everything observable after an in-process run.
struct LocalRunResult {
  // PK(D) from step 5, decrypted by the harness: signed level-2 integers.
  Matrix<mpz_class> distances_int;
  embedding::ProbabilityMatrix m;  // unpermuted
  embedding::TsneResult tsne;
  aggregate::EmbeddingArtifact artifact;
  std::vector<aggregate::EmbeddingArtifact> participant_results;
  ViewTranscript s_view;
  ViewTranscript t_view;
  std::vector<ViewTranscript> participant_views;
  NoiseLedger ledger;
  int unconverged_rows = 0;
  // Wall time and bytes on the wire per step; index is the step number.
  std::array<double, 9> step_seconds{};
  std::array<size_t, 9> step_bytes{};
};

// Runs all eight steps with every role in this process. Each message is
// encoded to its wire form and decoded again before delivery.
absl::StatusOr<LocalRunResult> RunLocalProtocol(
    const std::vector<Dataset>& datasets, const TaskConfig& config,
    LocalRunOptions options = {});

}  // namespace jtsne::protocol

#endif  // JTSNE_PROTOCOL_DRIVER_H_
