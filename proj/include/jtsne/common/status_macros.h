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

#ifndef JTSNE_COMMON_STATUS_MACROS_H_
#define JTSNE_COMMON_STATUS_MACROS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define JTSNE_RETURN_IF_ERROR(expr)             \
  do {                                          \
    const absl::Status _jtsne_status = (expr);  \
    if (!_jtsne_status.ok()) return _jtsne_status; \
  } while (0)

#define JTSNE_STATUS_CONCAT_INNER_(x, y) x##y
#define JTSNE_STATUS_CONCAT_(x, y) JTSNE_STATUS_CONCAT_INNER_(x, y)

#define JTSNE_ASSIGN_OR_RETURN_IMPL_(statusor, lhs, rexpr) \
  auto statusor = (rexpr);                                 \
  if (!statusor.ok()) return statusor.status();            \
  lhs = std::move(statusor).value()

// Evaluates an absl::StatusOr expression, returning its status on error and
// otherwise assigning the value to `lhs`.
#define JTSNE_ASSIGN_OR_RETURN(lhs, rexpr) \
  JTSNE_ASSIGN_OR_RETURN_IMPL_(            \
      JTSNE_STATUS_CONCAT_(_jtsne_statusor_, __LINE__), lhs, rexpr)

#endif  // JTSNE_COMMON_STATUS_MACROS_H_
