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

#ifndef JTSNE_AGGREGATE_DENSITY_H_
#define JTSNE_AGGREGATE_DENSITY_H_

#include <optional>
#include <span>
#include <string>

#include "absl/status/statusor.h"
#include "jtsne/common/matrix.h"
#include "json.hpp"

namespace jtsne::aggregate {

inline constexpr int kDefaultRasterResolution = 256;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Bounds {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  bool Contains(const Point2& p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  bool operator==(const Bounds&) const = default;
};

nlohmann::json BoundsToJson(const Bounds& b);
absl::StatusOr<Bounds> BoundsFromJson(const nlohmann::json& j);

// Tight bounding box, widened to unit size on a degenerate axis, then padded
// by `pad` on every side.
absl::StatusOr<Bounds> BoundingBox(std::span<const Point2> points, double pad);

// Scott's rule for an isotropic 2-D Gaussian: n^(-1/6) times the mean of the
// per-axis standard deviations. Falls back to 1.0 when the spread is zero.
double ScottBandwidth(std::span<const Point2> points);

// Gaussian KDE on an R x R raster over `bounds`. Row r covers y, column c
// covers x. Each kernel is integrated over the cells and renormalized to unit
// mass inside the raster, so sum(grid) * cell_area equals the point count.
struct DensityRaster {
  int resolution = kDefaultRasterResolution;
  Bounds bounds;
  double bandwidth = 0.0;
  std::string owner_scope = "all";
  size_t point_count = 0;
  RealMatrix grid;

  double cell_area() const {
    return bounds.width() / resolution * (bounds.height() / resolution);
  }
  double Mass() const;
};

absl::StatusOr<DensityRaster> KdeDensity(std::span<const Point2> points,
                                         const Bounds& bounds, double bandwidth,
                                         int resolution,
                                         std::string owner_scope = "all");

// Binary form: [u32 LE header length][JSON header][R*R float32 LE, row-major].
std::string SerializeRaster(const DensityRaster& raster);
absl::StatusOr<DensityRaster> ParseRaster(std::string_view bytes);

}  // namespace jtsne::aggregate

#endif  // JTSNE_AGGREGATE_DENSITY_H_
