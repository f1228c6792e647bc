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

#ifndef JTSNE_AGGREGATE_GRID_H_
#define JTSNE_AGGREGATE_GRID_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "jtsne/aggregate/density.h"
#include "json.hpp"

namespace jtsne::aggregate {

inline constexpr int kDefaultGridSize = 20;

// G x G lattice with per-owner counts. Cell (row, col): row indexes y,
// col indexes x.
struct GridCounts {
  int size = kDefaultGridSize;
  Bounds bounds;
  std::vector<std::string> owners;
  // counts[(row * size + col) * owners.size() + owner]
  std::vector<uint32_t> counts;

  uint32_t At(int row, int col, size_t owner) const {
    return counts[(static_cast<size_t>(row) * size + col) * owners.size() +
                  owner];
  }
  uint32_t CellTotal(int row, int col) const;
  uint64_t Total() const;

  nlohmann::json ToJson() const;
  static absl::StatusOr<GridCounts> FromJson(const nlohmann::json& j);
};

// Cell index along one axis. Cells are (lo, hi] intervals so a point on an
// interior edge lands in the lower-index cell; the minimum edge itself maps
// to cell 0.
int CellIndex(double v, double lo, double hi, int cells);

// `owner_index[i]` indexes `owners` for point i. Points outside the bounds
// are rejected.
absl::StatusOr<GridCounts> ComputeGridCounts(std::span<const Point2> points,
                                             std::span<const size_t> owner_index,
                                             std::vector<std::string> owners,
                                             const Bounds& bounds, int size);

}  // namespace jtsne::aggregate

#endif  // JTSNE_AGGREGATE_GRID_H_
