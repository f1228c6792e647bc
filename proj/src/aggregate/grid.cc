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

#include "jtsne/aggregate/grid.h"

#include <algorithm>
#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace jtsne::aggregate {

uint32_t GridCounts::CellTotal(int row, int col) const {
  uint32_t total = 0;
  for (size_t o = 0; o < owners.size(); ++o) total += At(row, col, o);
  return total;
}

uint64_t GridCounts::Total() const {
  uint64_t total = 0;
  for (uint32_t c : counts) total += c;
  return total;
}

nlohmann::json GridCounts::ToJson() const {
  nlohmann::json cells = nlohmann::json::array();
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      if (CellTotal(r, c) == 0) continue;
      nlohmann::json per_owner = nlohmann::json::object();
      for (size_t o = 0; o < owners.size(); ++o) {
        if (At(r, c, o) > 0) per_owner[owners[o]] = At(r, c, o);
      }
      cells.push_back({{"row", r}, {"col", c}, {"counts", per_owner}});
    }
  }
  return {{"size", size},
          {"bounds", BoundsToJson(bounds)},
          {"owners", owners},
          {"cells", cells}};
}

absl::StatusOr<GridCounts> GridCounts::FromJson(const nlohmann::json& j) {
  GridCounts g;
  try {
    g.size = j.at("size").get<int>();
    auto b = BoundsFromJson(j.at("bounds"));
    if (!b.ok()) return b.status();
    g.bounds = *b;
    g.owners = j.at("owners").get<std::vector<std::string>>();
    if (g.size < 1 || g.size > 4096) {
      return absl::InvalidArgumentError("grid: bad size");
    }
    g.counts.assign(static_cast<size_t>(g.size) * g.size * g.owners.size(), 0);
    for (const auto& cell : j.at("cells")) {
      const int r = cell.at("row").get<int>();
      const int c = cell.at("col").get<int>();
      if (r < 0 || r >= g.size || c < 0 || c >= g.size) {
        return absl::InvalidArgumentError("grid: cell out of range");
      }
      for (const auto& [owner, count] : cell.at("counts").items()) {
        const auto it = std::find(g.owners.begin(), g.owners.end(), owner);
        if (it == g.owners.end()) {
          return absl::InvalidArgumentError(
              absl::StrCat("grid: unknown owner ", owner));
        }
        const auto o = static_cast<size_t>(it - g.owners.begin());
        g.counts[(static_cast<size_t>(r) * g.size + c) * g.owners.size() + o] =
            count.get<uint32_t>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("grid: ", e.what()));
  }
  return g;
}

int CellIndex(double v, double lo, double hi, int cells) {
  const double t = (v - lo) / (hi - lo) * cells;
  // (lo + k*step, lo + (k+1)*step] -> k
  const int k = static_cast<int>(std::ceil(t)) - 1;
  return std::clamp(k, 0, cells - 1);
}

absl::StatusOr<GridCounts> ComputeGridCounts(std::span<const Point2> points,
                                             std::span<const size_t> owner_index,
                                             std::vector<std::string> owners,
                                             const Bounds& bounds, int size) {
  if (size < 1) return absl::InvalidArgumentError("grid size must be >= 1");
  if (points.size() != owner_index.size()) {
    return absl::InvalidArgumentError("points and owner indices differ in length");
  }
  if (!(bounds.width() > 0.0) || !(bounds.height() > 0.0)) {
    return absl::InvalidArgumentError("bounds must have positive extent");
  }
  GridCounts g;
  g.size = size;
  g.bounds = bounds;
  g.owners = std::move(owners);
  g.counts.assign(static_cast<size_t>(size) * size * g.owners.size(), 0);
  for (size_t i = 0; i < points.size(); ++i) {
    if (owner_index[i] >= g.owners.size()) {
      return absl::InvalidArgumentError(absl::StrCat("point ", i, " has no owner"));
    }
    if (!bounds.Contains(points[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat("point ", i, " lies outside the grid bounds"));
    }
    const int col = CellIndex(points[i].x, bounds.xmin, bounds.xmax, size);
    const int row = CellIndex(points[i].y, bounds.ymin, bounds.ymax, size);
    ++g.counts[(static_cast<size_t>(row) * size + col) * g.owners.size() +
               owner_index[i]];
  }
  return g;
}

}  // namespace jtsne::aggregate
