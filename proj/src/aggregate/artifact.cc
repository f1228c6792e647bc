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

#include "jtsne/aggregate/artifact.h"

#include <algorithm>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/escaping.h"
#include "absl/strings/str_cat.h"
#include "jtsne/common/status_macros.h"

namespace jtsne::aggregate {

namespace {

nlohmann::json RasterToJson(const DensityRaster& r) {
  return absl::Base64Escape(SerializeRaster(r));
}

absl::StatusOr<DensityRaster> RasterFromJson(const nlohmann::json& j) {
  if (!j.is_string()) return absl::InvalidArgumentError("raster must be base64");
  std::string bytes;
  if (!absl::Base64Unescape(j.get<std::string>(), &bytes)) {
    return absl::InvalidArgumentError("raster: invalid base64");
  }
  return ParseRaster(bytes);
}

}  // namespace

std::string ModeName(VisualizationMode mode) {
  return mode == VisualizationMode::kScatterplot ? "scatterplot" : "density";
}

absl::StatusOr<VisualizationMode> ParseMode(std::string_view name) {
  if (name == "scatterplot" || name == "scatter") {
    return VisualizationMode::kScatterplot;
  }
  if (name == "density") return VisualizationMode::kDensity;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown visualization mode '", std::string(name), "'"));
}

size_t EmbeddingArtifact::TotalPoints() const {
  size_t total = 0;
  for (const auto& [owner, count] : owner_counts) total += count;
  return total;
}

nlohmann::json EmbeddingArtifact::ToJson() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const ArtifactPoint& p : points) {
    nlohmann::json e = {{"point_id", p.point_id},
                        {"owner_id", p.owner_id},
                        {"x", p.x},
                        {"y", p.y}};
    if (p.label) e["label"] = *p.label;
    if (!p.attributes.empty()) e["attributes"] = p.attributes;
    pts.push_back(std::move(e));
  }
  nlohmann::json per_owner = nlohmann::json::array();
  for (const DensityRaster& r : owner_density) per_owner.push_back(RasterToJson(r));
  return {{"task_id", task_id},
          {"mode", ModeName(mode)},
          {"viewer", viewer},
          {"bounds", BoundsToJson(bounds)},
          {"owners", owners},
          {"owner_counts", owner_counts},
          {"points", pts},
          {"global_density", RasterToJson(global_density)},
          {"owner_density", per_owner},
          {"grid", grid.ToJson()}};
}

nlohmann::json EmbeddingArtifact::DensityJson() const {
  nlohmann::json j = ToJson();
  j.erase("points");
  return j;
}

absl::StatusOr<EmbeddingArtifact> EmbeddingArtifact::FromJson(
    const nlohmann::json& j) {
  EmbeddingArtifact a;
  try {
    a.task_id = j.at("task_id").get<std::string>();
    JTSNE_ASSIGN_OR_RETURN(a.mode, ParseMode(j.at("mode").get<std::string>()));
    a.viewer = j.value("viewer", "");
    JTSNE_ASSIGN_OR_RETURN(a.bounds, BoundsFromJson(j.at("bounds")));
    a.owners = j.at("owners").get<std::vector<std::string>>();
    a.owner_counts = j.at("owner_counts").get<std::map<std::string, size_t>>();
    for (const auto& e : j.value("points", nlohmann::json::array())) {
      ArtifactPoint p;
      p.point_id = e.at("point_id").get<size_t>();
      p.owner_id = e.at("owner_id").get<std::string>();
      p.x = e.at("x").get<double>();
      p.y = e.at("y").get<double>();
      if (e.contains("label")) p.label = e.at("label").get<std::string>();
      if (e.contains("attributes")) {
        p.attributes = e.at("attributes").get<std::vector<double>>();
      }
      a.points.push_back(std::move(p));
    }
    JTSNE_ASSIGN_OR_RETURN(a.global_density,
                           RasterFromJson(j.at("global_density")));
    for (const auto& r : j.at("owner_density")) {
      JTSNE_ASSIGN_OR_RETURN(DensityRaster raster, RasterFromJson(r));
      a.owner_density.push_back(std::move(raster));
    }
    JTSNE_ASSIGN_OR_RETURN(a.grid, GridCounts::FromJson(j.at("grid")));
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("artifact: ", e.what()));
  }
  return a;
}

absl::StatusOr<EmbeddingArtifact> ExportArtifact(
    std::string task_id, const RealMatrix& embedding,
    const std::vector<std::string>& owners,
    const std::vector<std::string>& owner_of,
    const std::vector<std::optional<std::string>>& labels,
    VisualizationMode mode, const ExportOptions& options) {
  const size_t n = embedding.rows();
  if (embedding.cols() != 2) {
    return absl::InvalidArgumentError("artifact export needs a 2-D embedding");
  }
  if (owner_of.size() != n || labels.size() != n) {
    return absl::InvalidArgumentError("owner/label lists must have N entries");
  }
  std::vector<Point2> pts(n);
  std::vector<size_t> owner_index(n);
  for (size_t i = 0; i < n; ++i) {
    pts[i] = {embedding(i, 0), embedding(i, 1)};
    const auto it = std::find(owners.begin(), owners.end(), owner_of[i]);
    if (it == owners.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("point ", i, " has unknown owner ", owner_of[i]));
    }
    owner_index[i] = static_cast<size_t>(it - owners.begin());
  }
  const double h = options.bandwidth.value_or(ScottBandwidth(pts));
  JTSNE_ASSIGN_OR_RETURN(const Bounds bounds, BoundingBox(pts, 3.0 * h));

  EmbeddingArtifact a;
  a.task_id = std::move(task_id);
  a.mode = mode;
  a.bounds = bounds;
  a.owners = owners;
  for (const auto& o : owners) a.owner_counts[o] = 0;
  for (size_t i = 0; i < n; ++i) {
    ++a.owner_counts[owner_of[i]];
    a.points.push_back({i, owner_of[i], pts[i].x, pts[i].y, labels[i], {}});
  }
  JTSNE_ASSIGN_OR_RETURN(
      a.global_density,
      KdeDensity(pts, bounds, h, options.raster_resolution, "all"));
  // Per-owner rasters share the global bandwidth so they partition the
  // global raster.
  for (size_t o = 0; o < owners.size(); ++o) {
    std::vector<Point2> mine;
    for (size_t i = 0; i < n; ++i) {
      if (owner_index[i] == o) mine.push_back(pts[i]);
    }
    JTSNE_ASSIGN_OR_RETURN(
        DensityRaster r,
        KdeDensity(mine, bounds, h, options.raster_resolution, owners[o]));
    a.owner_density.push_back(std::move(r));
  }
  JTSNE_ASSIGN_OR_RETURN(
      a.grid, ComputeGridCounts(pts, owner_index, owners, bounds, options.grid_size));
  return a;
}

EmbeddingArtifact ViewFor(const EmbeddingArtifact& full,
                          const std::string& viewer) {
  EmbeddingArtifact view = full;
  view.viewer = viewer;
  if (full.mode == VisualizationMode::kDensity) {
    std::erase_if(view.points, [&](const ArtifactPoint& p) {
      return p.owner_id != viewer;
    });
  }
  for (ArtifactPoint& p : view.points) p.attributes.clear();
  return view;
}

absl::Status AttachLocalAttributes(EmbeddingArtifact& view,
                                   const std::string& owner,
                                   const RealMatrix& attributes) {
  std::vector<ArtifactPoint*> mine;
  for (ArtifactPoint& p : view.points) {
    if (p.owner_id == owner) mine.push_back(&p);
  }
  std::sort(mine.begin(), mine.end(),
            [](const ArtifactPoint* a, const ArtifactPoint* b) {
              return a->point_id < b->point_id;
            });
  if (mine.size() != attributes.rows()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "artifact has ", mine.size(), " points for ", owner, " but local data has ",
        attributes.rows()));
  }
  for (size_t i = 0; i < mine.size(); ++i) {
    const auto row = attributes.row(i);
    mine[i]->attributes.assign(row.begin(), row.end());
  }
  return absl::OkStatus();
}

}  // namespace jtsne::aggregate
