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

#include "jtsne/protocol/oracle.h"

#include <algorithm>
#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "jtsne/common/status_macros.h"

namespace jtsne::protocol {

absl::StatusOr<RealMatrix> StackDatasets(const std::vector<Dataset>& datasets,
                                         const TaskConfig& config) {
  RealMatrix out(config.TotalPoints(), config.dims);
  size_t row = 0;
  for (const auto& spec : config.participants) {
    const auto it = std::find_if(datasets.begin(), datasets.end(),
                                 [&](const Dataset& d) { return d.owner_id == spec.id; });
    if (it == datasets.end()) {
      return absl::NotFoundError(absl::StrCat("no dataset for ", spec.id));
    }
    JTSNE_RETURN_IF_ERROR(it->Validate(config.dims));
    if (it->points.rows() != spec.count) {
      return absl::InvalidArgumentError(
          absl::StrCat(spec.id, ": expected ", spec.count, " points"));
    }
    JTSNE_ASSIGN_OR_RETURN(const RealMatrix points, config.Normalize(it->points));
    for (size_t i = 0; i < spec.count; ++i, ++row) {
      for (size_t k = 0; k < config.dims; ++k) out(row, k) = points(i, k);
    }
  }
  return out;
}

absl::StatusOr<OracleResult> RunPlaintextOracle(
    const std::vector<Dataset>& datasets, const TaskConfig& config,
    bool run_tsne) {
  JTSNE_ASSIGN_OR_RETURN(const RealMatrix x, StackDatasets(datasets, config));
  const size_t n = x.rows(), m = x.cols();
  OracleResult out;
  out.data_int = Matrix<mpz_class>(n, m);
  for (size_t i = 0; i < x.size(); ++i) {
    out.data_int.data()[i] =
        mpz_class(std::nearbyint(std::ldexp(x.data()[i], config.scale_bits)));
  }
  out.distances_int = Matrix<mpz_class>(n, n, mpz_class(0));
  out.distances = RealMatrix(n, n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      mpz_class sum = 0;
      for (size_t k = 0; k < m; ++k) {
        const mpz_class diff = out.data_int(i, k) - out.data_int(j, k);
        sum += diff * diff;
      }
      out.distances(i, j) = std::ldexp(sum.get_d(), -2 * config.scale_bits);
      out.distances_int(i, j) = std::move(sum);
    }
  }
  // Affinities only depend on each row relative to its minimum. Subtracting
  // it in integers first means large distances round once, the same way the
  // secure pipeline rounds them.
  RealMatrix shifted(n, n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const mpz_class* min = nullptr;
    for (size_t j = 0; j < n; ++j) {
      if (j != i && (min == nullptr || out.distances_int(i, j) < *min)) {
        min = &out.distances_int(i, j);
      }
    }
    for (size_t j = 0; j < n && min != nullptr; ++j) {
      if (j == i) continue;
      const mpz_class rel = out.distances_int(i, j) - *min;
      shifted(i, j) = std::ldexp(rel.get_d(), -2 * config.scale_bits);
    }
  }
  JTSNE_ASSIGN_OR_RETURN(
      embedding::CalibratedConditionals cal,
      embedding::CalibrateConditionals(shifted, config.tsne.perplexity));
  out.bandwidths = std::move(cal.bandwidths);
  JTSNE_ASSIGN_OR_RETURN(out.p, embedding::Symmetrize(cal.conditional));
  if (run_tsne) {
    JTSNE_ASSIGN_OR_RETURN(out.tsne, embedding::RunTsne(out.p, config.tsne));
  }
  return out;
}

}  // namespace jtsne::protocol
