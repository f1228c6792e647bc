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

#ifndef JTSNE_AGGREGATE_ARTIFACT_H_
#define JTSNE_AGGREGATE_ARTIFACT_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "jtsne/aggregate/density.h"
#include "jtsne/aggregate/grid.h"
#include "jtsne/common/matrix.h"
#include "json.hpp"

namespace jtsne::aggregate {

enum class VisualizationMode { kScatterplot, kDensity };

std::string ModeName(VisualizationMode mode);
// Accepts "scatterplot"/"scatter" and "density".
absl::StatusOr<VisualizationMode> ParseMode(std::string_view name);

struct ArtifactPoint {
  size_t point_id = 0;
  std::string owner_id;
  double x = 0.0;
  double y = 0.0;
  std::optional<std::string> label;
  // Raw attributes. Never produced by T; filled in by the owning
  // participant from its local data.
  std::vector<double> attributes;

  bool operator==(const ArtifactPoint&) const = default;
};

struct EmbeddingArtifact {
  std::string task_id;
  VisualizationMode mode = VisualizationMode::kDensity;
  // Owner the view was rendered for; empty for the complete artifact held
  // by T.
  std::string viewer;
  Bounds bounds;
  std::vector<std::string> owners;
  std::map<std::string, size_t> owner_counts;
  std::vector<ArtifactPoint> points;
  DensityRaster global_density;
  std::vector<DensityRaster> owner_density;
  GridCounts grid;

  size_t TotalPoints() const;

  // Rasters are embedded as base64 of the binary raster form.
  nlohmann::json ToJson() const;
  static absl::StatusOr<EmbeddingArtifact> FromJson(const nlohmann::json& j);
  // Rasters and grid counts only.
  nlohmann::json DensityJson() const;
};

struct ExportOptions {
  int raster_resolution = kDefaultRasterResolution;
  int grid_size = kDefaultGridSize;
  // Overrides Scott's rule when set.
  std::optional<double> bandwidth;
};

// Builds the complete artifact from an N x 2 embedding. `owner_of[i]` and
// `labels[i]` describe point i; `owners` fixes the owner order.
absl::StatusOr<EmbeddingArtifact> ExportArtifact(
    std::string task_id, const RealMatrix& embedding,
    const std::vector<std::string>& owners,
    const std::vector<std::string>& owner_of,
    const std::vector<std::optional<std::string>>& labels,
    VisualizationMode mode, const ExportOptions& options = {});

// The artifact as `viewer` may see it. Scatterplot mode keeps every point
// with labels; density mode keeps only the viewer's own points. Rasters and
// grid counts are always included. Attributes are always stripped.
EmbeddingArtifact ViewFor(const EmbeddingArtifact& full,
                          const std::string& viewer);

// Copies `attributes` (rows in the owner's local order) onto the viewer's
// own points, in ascending point_id order.
absl::Status AttachLocalAttributes(EmbeddingArtifact& view,
                                   const std::string& owner,
                                   const RealMatrix& attributes);

}  // namespace jtsne::aggregate

#endif  // JTSNE_AGGREGATE_ARTIFACT_H_
