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

#include "jtsne/kernels/density.h"

#include <cstddef>

namespace jtsne::kernels {

namespace {

void AccumulateSeparableImpl(const RealMatrix& row_weights,
                             const RealMatrix& col_weights, RealMatrix* raster,
                             bool parallel) {
  const size_t points = row_weights.rows();
  const size_t rows = raster->rows();
  const size_t cols = raster->cols();
  const auto count = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t sr = 0; sr < count; ++sr) {
    const auto r = static_cast<size_t>(sr);
    auto out = raster->row(r);
    for (size_t p = 0; p < points; ++p) {
      const double wr = row_weights(p, r);
      if (wr == 0.0) continue;
      const auto wc = col_weights.row(p);
      for (size_t c = 0; c < cols; ++c) out[c] += wr * wc[c];
    }
  }
}

}  // namespace

void AccumulateSeparable(const RealMatrix& row_weights,
                         const RealMatrix& col_weights, RealMatrix* raster) {
  AccumulateSeparableImpl(row_weights, col_weights, raster, true);
}

namespace serial {

void AccumulateSeparable(const RealMatrix& row_weights,
                         const RealMatrix& col_weights, RealMatrix* raster) {
  AccumulateSeparableImpl(row_weights, col_weights, raster, false);
}

}  // namespace serial
}  // namespace jtsne::kernels
