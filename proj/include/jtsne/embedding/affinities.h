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

#ifndef JTSNE_EMBEDDING_AFFINITIES_H_
#define JTSNE_EMBEDDING_AFFINITIES_H_

#include <cstddef>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "jtsne/common/matrix.h"

namespace jtsne::embedding {

inline constexpr double kEntropyToleranceBits = 1e-5;
inline constexpr int kMaxBandwidthIterations = 50;
inline constexpr double kKlFloor = 1e-12;

enum class ProbabilityKind { kConditional, kSymmetric };

// Conditional: row-stochastic with zero diagonal. Symmetric: symmetric,
// total mass 1, zero diagonal.
struct ProbabilityMatrix {
  RealMatrix values;
  ProbabilityKind kind = ProbabilityKind::kConditional;
};

// Gaussian variances σ_i² per point.
struct Bandwidths {
  std::vector<double> sigma_sq;
};

struct BandwidthSearchResult {
  double sigma_sq = 0.0;
  double entropy_bits = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Finds σ² for one row of squared distances so that the row's conditional
// distribution has perplexity 2^H = `perplexity`. The entry at `self_index`
// is excluded. The row is shifted by its minimum before exponentiation and
// reductions run over the sorted row, so the result is invariant to adding a
// constant to the row and to reordering its entries.
absl::StatusOr<BandwidthSearchResult> SearchBandwidth(
    std::span<const double> sq_distances, size_t self_index, double perplexity);

// Conditional probabilities p_{j|i} at the given bandwidths.
absl::StatusOr<ProbabilityMatrix> ConditionalProbabilities(
    const RealMatrix& sq_distances, const Bandwidths& bandwidths);

struct CalibratedConditionals {
  ProbabilityMatrix conditional;
  Bandwidths bandwidths;
  int unconverged_rows = 0;
};

// Per-row bandwidth search followed by p_{j|i}. Rows are independent and are
// processed in parallel.
absl::StatusOr<CalibratedConditionals> CalibrateConditionals(
    const RealMatrix& sq_distances, double perplexity);

// p_ij = (p_{j|i} + p_{i|j}) / 2N.
absl::StatusOr<ProbabilityMatrix> Symmetrize(const ProbabilityMatrix& conditional);

struct LowDimAffinities {
  RealMatrix q;        // normalized, zero diagonal
  RealMatrix student;  // (1 + |y_i - y_j|^2)^-1, zero diagonal
};

LowDimAffinities ComputeLowDimAffinities(const RealMatrix& y);

// Σ p_ij log(p_ij / q_ij) over off-diagonal pairs, 0 log 0 = 0, q floored at
// kKlFloor.
double KlDivergence(const RealMatrix& p, const RealMatrix& q);

}  // namespace jtsne::embedding

#endif  // JTSNE_EMBEDDING_AFFINITIES_H_
