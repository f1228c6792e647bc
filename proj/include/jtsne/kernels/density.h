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

#ifndef JTSNE_KERNELS_DENSITY_H_
#define JTSNE_KERNELS_DENSITY_H_

#include <vector>

#include "jtsne/common/matrix.h"

namespace jtsne::kernels {

// Sums separable per-point kernels into a raster:
//   raster(r, c) += Σ_p row_weights(p, r) * col_weights(p, c).
// Each cell is accumulated over points in index order.
void AccumulateSeparable(const RealMatrix& row_weights,
                         const RealMatrix& col_weights, RealMatrix* raster);

namespace serial {
void AccumulateSeparable(const RealMatrix& row_weights,
                         const RealMatrix& col_weights, RealMatrix* raster);
}  // namespace serial

}  // namespace jtsne::kernels

#endif  // JTSNE_KERNELS_DENSITY_H_
