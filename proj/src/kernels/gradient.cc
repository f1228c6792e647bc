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

#include "jtsne/kernels/gradient.h"

#include <cstddef>

namespace jtsne::kernels {

namespace {

StudentKernel ComputeStudentKernelImpl(const RealMatrix& y, bool parallel) {
  const size_t n = y.rows();
  const size_t dims = y.cols();
  StudentKernel out{RealMatrix(n, n, 0.0), 0.0};
  std::vector<double> row_sums(n, 0.0);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t si = 0; si < count; ++si) {
    const auto i = static_cast<size_t>(si);
    double sum = 0.0;
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double d2 = 0.0;
      for (size_t k = 0; k < dims; ++k) {
        const double diff = y(i, k) - y(j, k);
        d2 += diff * diff;
      }
      const double v = 1.0 / (1.0 + d2);
      out.num(i, j) = v;
      sum += v;
    }
    row_sums[i] = sum;
  }
  for (double s : row_sums) out.total += s;
  return out;
}

RealMatrix KlGradientImpl(const RealMatrix& p, double p_scale,
                          const StudentKernel& kernel, const RealMatrix& y,
                          bool parallel) {
  const size_t n = y.rows();
  const size_t dims = y.cols();
  RealMatrix grad(n, dims, 0.0);
  const double inv_total = 1.0 / kernel.total;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t si = 0; si < count; ++si) {
    const auto i = static_cast<size_t>(si);
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double num = kernel.num(i, j);
      const double mult = (p_scale * p(i, j) - num * inv_total) * num;
      for (size_t k = 0; k < dims; ++k) {
        grad(i, k) += mult * (y(i, k) - y(j, k));
      }
    }
    for (size_t k = 0; k < dims; ++k) grad(i, k) *= 4.0;
  }
  return grad;
}

}  // namespace

StudentKernel ComputeStudentKernel(const RealMatrix& y) {
  return ComputeStudentKernelImpl(y, true);
}

RealMatrix KlGradient(const RealMatrix& p, double p_scale,
                      const StudentKernel& kernel, const RealMatrix& y) {
  return KlGradientImpl(p, p_scale, kernel, y, true);
}

namespace serial {

StudentKernel ComputeStudentKernel(const RealMatrix& y) {
  return ComputeStudentKernelImpl(y, false);
}

RealMatrix KlGradient(const RealMatrix& p, double p_scale,
                      const StudentKernel& kernel, const RealMatrix& y) {
  return KlGradientImpl(p, p_scale, kernel, y, false);
}

}  // namespace serial
}  // namespace jtsne::kernels
