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

#include "jtsne/embedding/affinities.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "jtsne/common/status_macros.h"
#include "jtsne/kernels/gradient.h"

namespace jtsne::embedding {

namespace {

// A distance row with the self entry removed, shifted by its minimum and
// sorted ascending. Sorting fixes the summation order.
struct ShiftedRow {
  double min = 0.0;
  std::vector<double> sorted;
};

absl::StatusOr<ShiftedRow> PrepareRow(std::span<const double> row,
                                      size_t self_index) {
  ShiftedRow out;
  out.sorted.reserve(row.size());
  for (size_t j = 0; j < row.size(); ++j) {
    if (j == self_index) continue;
    if (!std::isfinite(row[j]) || row[j] < 0.0) {
      return absl::InvalidArgumentError(
          absl::StrCat("distance entry ", j, " is negative or non-finite"));
    }
    out.sorted.push_back(row[j]);
  }
  if (out.sorted.empty()) {
    return absl::InvalidArgumentError("row has no off-diagonal entries");
  }
  std::sort(out.sorted.begin(), out.sorted.end());
  out.min = out.sorted.front();
  for (double& v : out.sorted) v -= out.min;
  return out;
}

struct RowMoments {
  double mass = 0.0;      // Σ exp(-β v)
  double weighted = 0.0;  // Σ v exp(-β v)
};

RowMoments Moments(const std::vector<double>& sorted, double beta) {
  RowMoments m;
  for (double v : sorted) {
    const double e = std::exp(-beta * v);
    m.mass += e;
    m.weighted += v * e;
  }
  return m;
}

double EntropyBits(const RowMoments& m, double beta) {
  return (std::log(m.mass) + beta * m.weighted / m.mass) / std::numbers::ln2;
}

struct BetaSearch {
  double beta = 1.0;
  double entropy_bits = 0.0;
  int iterations = 0;
  bool converged = false;
};

BetaSearch SearchBeta(const std::vector<double>& sorted, double perplexity) {
  BetaSearch out;
  double total = 0.0;
  for (double v : sorted) total += v;
  const double mean = total / static_cast<double>(sorted.size());
  if (mean == 0.0) {
    // Every neighbour is equidistant: uniform for any β.
    out.beta = 1.0;
    out.entropy_bits = std::log2(static_cast<double>(sorted.size()));
    out.converged = true;
    return out;
  }
  const double target = std::log2(perplexity);
  double beta = 1.0 / mean;
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < kMaxBandwidthIterations; ++iter) {
    const double h = EntropyBits(Moments(sorted, beta), beta);
    out.beta = beta;
    out.entropy_bits = h;
    out.iterations = iter + 1;
    const double diff = h - target;
    if (std::abs(diff) <= kEntropyToleranceBits) {
      out.converged = true;
      break;
    }
    if (diff > 0) {
      lower = beta;
      beta = std::isinf(upper) ? beta * 2.0 : (beta + upper) / 2.0;
    } else {
      upper = beta;
      beta = lower == 0.0 ? beta / 2.0 : (beta + lower) / 2.0;
    }
  }
  return out;
}

// Writes p_{j|i} for one row at precision β into `out` (diagonal = 0).
void FillConditionalRow(std::span<const double> row, size_t self_index,
                        const ShiftedRow& shifted, double beta,
                        std::span<double> out) {
  const double mass = Moments(shifted.sorted, beta).mass;
  for (size_t j = 0; j < row.size(); ++j) {
    out[j] = j == self_index
                 ? 0.0
                 : std::exp(-beta * (row[j] - shifted.min)) / mass;
  }
}

absl::Status CheckSquare(const RealMatrix& m) {
  if (m.rows() != m.cols() || m.rows() < 2) {
    return absl::InvalidArgumentError(absl::StrCat(
        "expected a square matrix with N >= 2, got ", m.rows(), "x", m.cols()));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<BandwidthSearchResult> SearchBandwidth(
    std::span<const double> sq_distances, size_t self_index,
    double perplexity) {
  if (!(perplexity > 0.0)) {
    return absl::InvalidArgumentError("perplexity must be positive");
  }
  if (sq_distances.size() < 3) {
    return absl::InvalidArgumentError(
        "bandwidth search needs at least two off-diagonal entries");
  }
  JTSNE_ASSIGN_OR_RETURN(ShiftedRow shifted,
                         PrepareRow(sq_distances, self_index));
  const BetaSearch search = SearchBeta(shifted.sorted, perplexity);
  return BandwidthSearchResult{1.0 / (2.0 * search.beta), search.entropy_bits,
                               search.iterations, search.converged};
}

absl::StatusOr<ProbabilityMatrix> ConditionalProbabilities(
    const RealMatrix& sq_distances, const Bandwidths& bandwidths) {
  JTSNE_RETURN_IF_ERROR(CheckSquare(sq_distances));
  const size_t n = sq_distances.rows();
  if (bandwidths.sigma_sq.size() != n) {
    return absl::InvalidArgumentError("bandwidth count does not match N");
  }
  ProbabilityMatrix out{RealMatrix(n, n, 0.0), ProbabilityKind::kConditional};
  for (size_t i = 0; i < n; ++i) {
    if (sq_distances(i, i) != 0.0) {
      return absl::InvalidArgumentError("distance matrix diagonal must be zero");
    }
    const double sigma_sq = bandwidths.sigma_sq[i];
    if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) {
      return absl::InvalidArgumentError(
          absl::StrCat("bandwidth ", i, " must be positive and finite"));
    }
    JTSNE_ASSIGN_OR_RETURN(ShiftedRow shifted,
                           PrepareRow(sq_distances.row(i), i));
    FillConditionalRow(sq_distances.row(i), i, shifted, 1.0 / (2.0 * sigma_sq),
                       out.values.row(i));
  }
  return out;
}

absl::StatusOr<CalibratedConditionals> CalibrateConditionals(
    const RealMatrix& sq_distances, double perplexity) {
  JTSNE_RETURN_IF_ERROR(CheckSquare(sq_distances));
  if (!(perplexity > 0.0)) {
    return absl::InvalidArgumentError("perplexity must be positive");
  }
  const size_t n = sq_distances.rows();
  CalibratedConditionals out;
  out.conditional = {RealMatrix(n, n, 0.0), ProbabilityKind::kConditional};
  out.bandwidths.sigma_sq.assign(n, 0.0);
  std::vector<absl::Status> errors(n);
  std::vector<char> converged(n, 1);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t si = 0; si < count; ++si) {
    const auto i = static_cast<size_t>(si);
    auto shifted = PrepareRow(sq_distances.row(i), i);
    if (!shifted.ok()) {
      errors[i] = shifted.status();
      continue;
    }
    const BetaSearch search = SearchBeta(shifted->sorted, perplexity);
    converged[i] = search.converged ? 1 : 0;
    out.bandwidths.sigma_sq[i] = 1.0 / (2.0 * search.beta);
    FillConditionalRow(sq_distances.row(i), i, *shifted, search.beta,
                       out.conditional.values.row(i));
  }
  for (size_t i = 0; i < n; ++i) {
    JTSNE_RETURN_IF_ERROR(errors[i]);
    if (!converged[i]) ++out.unconverged_rows;
  }
  return out;
}

absl::StatusOr<ProbabilityMatrix> Symmetrize(
    const ProbabilityMatrix& conditional) {
  if (conditional.kind != ProbabilityKind::kConditional) {
    return absl::InvalidArgumentError("Symmetrize expects a conditional matrix");
  }
  JTSNE_RETURN_IF_ERROR(CheckSquare(conditional.values));
  const size_t n = conditional.values.rows();
  const double denom = 2.0 * static_cast<double>(n);
  ProbabilityMatrix out{RealMatrix(n, n, 0.0), ProbabilityKind::kSymmetric};
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      out.values(i, j) =
          (conditional.values(i, j) + conditional.values(j, i)) / denom;
    }
  }
  return out;
}

LowDimAffinities ComputeLowDimAffinities(const RealMatrix& y) {
  kernels::StudentKernel kernel = kernels::ComputeStudentKernel(y);
  const size_t n = y.rows();
  LowDimAffinities out{RealMatrix(n, n, 0.0), std::move(kernel.num)};
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      out.q(i, j) = out.student(i, j) / kernel.total;
    }
  }
  return out;
}

double KlDivergence(const RealMatrix& p, const RealMatrix& q) {
  double kl = 0.0;
  for (size_t i = 0; i < p.rows(); ++i) {
    for (size_t j = 0; j < p.cols(); ++j) {
      if (i == j) continue;
      const double pij = p(i, j);
      if (pij <= 0.0) continue;
      kl += pij * std::log(pij / std::max(q(i, j), kKlFloor));
    }
  }
  return kl;
}

}  // namespace jtsne::embedding
