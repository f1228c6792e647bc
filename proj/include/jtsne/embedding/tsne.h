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

#ifndef JTSNE_EMBEDDING_TSNE_H_
#define JTSNE_EMBEDDING_TSNE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "jtsne/common/matrix.h"
#include "jtsne/embedding/affinities.h"
#include "json.hpp"

namespace jtsne::embedding {

// Exact (O(N^2)) t-SNE optimizer settings.
struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iteration = 250;
  double exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double min_gain = 0.01;
  uint64_t init_seed = 0;
  double init_stddev = 1e-4;
  int output_dims = 2;
  // Backtrack any post-exaggeration step that would raise KL.
  bool monotone_after_exaggeration = true;

  // Checks positivity and perplexity < (N - 1) / 3.
  absl::Status Validate(size_t n_points) const;

  nlohmann::json ToJson() const;
  static absl::StatusOr<TsneConfig> FromJson(const nlohmann::json& j);
};

struct EmbeddingState {
  RealMatrix y;
  RealMatrix velocity;
  RealMatrix gains;
  int iteration = 0;
};

// Seeded Gaussian initialization, centered.
EmbeddingState InitialState(size_t n_points, const TsneConfig& config);

// One gains-adjusted momentum update against symmetric P. Exaggeration and
// momentum follow the schedule at state.iteration. Y is re-centered.
absl::StatusOr<EmbeddingState> GradientStep(EmbeddingState state,
                                            const ProbabilityMatrix& p,
                                            const TsneConfig& config);

struct TsneResult {
  RealMatrix y;
  // KL(P || Q) at every iterate, including the initial and final one
  // (iterations + 1 entries).
  std::vector<double> kl_trace;
};

absl::StatusOr<TsneResult> RunTsne(const ProbabilityMatrix& p,
                                   const TsneConfig& config);
absl::StatusOr<TsneResult> RunTsneFrom(EmbeddingState state,
                                       const ProbabilityMatrix& p,
                                       const TsneConfig& config);

// "iteration,kl" CSV.
std::string KlTraceCsv(const std::vector<double>& trace);

}  // namespace jtsne::embedding

#endif  // JTSNE_EMBEDDING_TSNE_H_
