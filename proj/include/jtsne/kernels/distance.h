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

#ifndef JTSNE_KERNELS_DISTANCE_H_
#define JTSNE_KERNELS_DISTANCE_H_

#include <gmpxx.h>

#include "jtsne/common/matrix.h"

namespace jtsne::kernels {

// Exact pairwise squared Euclidean distances between the rows of `points`
// (N x m scaled integers). Output is N x N, symmetric, zero diagonal.
Matrix<mpz_class> SquaredDistances(const Matrix<mpz_class>& points);

// Same for real-valued rows.
RealMatrix SquaredDistances(const RealMatrix& points);

namespace serial {
Matrix<mpz_class> SquaredDistances(const Matrix<mpz_class>& points);
RealMatrix SquaredDistances(const RealMatrix& points);
}  // namespace serial

}  // namespace jtsne::kernels

#endif  // JTSNE_KERNELS_DISTANCE_H_
