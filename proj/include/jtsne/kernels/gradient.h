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

#ifndef JTSNE_KERNELS_GRADIENT_H_
#define JTSNE_KERNELS_GRADIENT_H_

#include <vector>

#include "jtsne/common/matrix.h"

namespace jtsne::kernels {

// Student-t kernel values num_ij = (1 + |y_i - y_j|^2)^-1 with a zero
// diagonal, and their total Σ_{k≠l} num_kl. Row sums are accumulated in index
// order and combined serially, so the result does not depend on the thread
// count.
struct StudentKernel {
  RealMatrix num;
  double total = 0.0;
};

StudentKernel ComputeStudentKernel(const RealMatrix& y);

// KL gradient: g_i = 4 Σ_j (scale * p_ij - num_ij / total) num_ij (y_i - y_j).
// `p_scale` carries early exaggeration.
RealMatrix KlGradient(const RealMatrix& p, double p_scale,
                      const StudentKernel& kernel, const RealMatrix& y);

namespace serial {
StudentKernel ComputeStudentKernel(const RealMatrix& y);
RealMatrix KlGradient(const RealMatrix& p, double p_scale,
                      const StudentKernel& kernel, const RealMatrix& y);
}  // namespace serial

}  // namespace jtsne::kernels

#endif  // JTSNE_KERNELS_GRADIENT_H_
