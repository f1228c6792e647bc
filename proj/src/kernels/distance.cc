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

#include "jtsne/kernels/distance.h"

#include <cstddef>

namespace jtsne::kernels {

namespace {

template <typename T>
T RowDistance(const Matrix<T>& points, size_t i, size_t j) {
  T sum = 0;
  for (size_t k = 0; k < points.cols(); ++k) {
    const T diff = points(i, k) - points(j, k);
    sum += diff * diff;
  }
  return sum;
}

// Fills the upper triangle and mirrors it; row i is owned by one thread.
template <typename T>
Matrix<T> SquaredDistancesImpl(const Matrix<T>& points, bool parallel) {
  const size_t n = points.rows();
  Matrix<T> out(n, n, T(0));
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (std::ptrdiff_t si = 0; si < count; ++si) {
    const auto i = static_cast<size_t>(si);
    for (size_t j = i + 1; j < n; ++j) out(i, j) = RowDistance(points, i, j);
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < i; ++j) out(i, j) = out(j, i);
  }
  return out;
}

}  // namespace

Matrix<mpz_class> SquaredDistances(const Matrix<mpz_class>& points) {
  return SquaredDistancesImpl(points, true);
}

RealMatrix SquaredDistances(const RealMatrix& points) {
  return SquaredDistancesImpl(points, true);
}

namespace serial {

Matrix<mpz_class> SquaredDistances(const Matrix<mpz_class>& points) {
  return SquaredDistancesImpl(points, false);
}

RealMatrix SquaredDistances(const RealMatrix& points) {
  return SquaredDistancesImpl(points, false);
}

}  // namespace serial
}  // namespace jtsne::kernels
