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

#include "jtsne/aggregate/density.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "jtsne/kernels/density.h"

namespace jtsne::aggregate {

namespace {

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Mass of N(center, h^2) in each of `cells` equal cells over [lo, hi],
// renormalized to 1.
std::vector<double> CellWeights(double center, double h, double lo, double hi,
                                int cells) {
  std::vector<double> w(static_cast<size_t>(cells));
  const double step = (hi - lo) / cells;
  double prev = NormalCdf((lo - center) / h);
  double total = 0.0;
  for (int c = 0; c < cells; ++c) {
    const double edge = c + 1 == cells ? hi : lo + step * (c + 1);
    const double next = NormalCdf((edge - center) / h);
    w[static_cast<size_t>(c)] = next - prev;
    total += next - prev;
    prev = next;
  }
  if (total > 0.0) {
    for (double& v : w) v /= total;
  } else {
    // The kernel has no representable mass inside: put it in the nearest cell.
    const int c = std::clamp(static_cast<int>((center - lo) / step), 0, cells - 1);
    w[static_cast<size_t>(c)] = 1.0;
  }
  return w;
}

void PutU32Le(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t GetU32Le(std::string_view in, size_t pos) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

}  // namespace

nlohmann::json BoundsToJson(const Bounds& b) {
  return {{"xmin", b.xmin}, {"xmax", b.xmax}, {"ymin", b.ymin}, {"ymax", b.ymax}};
}

absl::StatusOr<Bounds> BoundsFromJson(const nlohmann::json& j) {
  try {
    Bounds b{j.at("xmin").get<double>(), j.at("xmax").get<double>(),
             j.at("ymin").get<double>(), j.at("ymax").get<double>()};
    if (!(b.xmax > b.xmin) || !(b.ymax > b.ymin)) {
      return absl::InvalidArgumentError("bounds must have positive extent");
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("bounds: ", e.what()));
  }
}

absl::StatusOr<Bounds> BoundingBox(std::span<const Point2> points, double pad) {
  if (points.empty()) return absl::InvalidArgumentError("no points");
  Bounds b{points[0].x, points[0].x, points[0].y, points[0].y};
  for (const Point2& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      return absl::InvalidArgumentError("non-finite coordinate");
    }
    b.xmin = std::min(b.xmin, p.x);
    b.xmax = std::max(b.xmax, p.x);
    b.ymin = std::min(b.ymin, p.y);
    b.ymax = std::max(b.ymax, p.y);
  }
  if (b.xmax == b.xmin) {
    b.xmin -= 0.5;
    b.xmax += 0.5;
  }
  if (b.ymax == b.ymin) {
    b.ymin -= 0.5;
    b.ymax += 0.5;
  }
  b.xmin -= pad;
  b.xmax += pad;
  b.ymin -= pad;
  b.ymax += pad;
  return b;
}

double ScottBandwidth(std::span<const Point2> points) {
  const auto n = static_cast<double>(points.size());
  if (points.size() < 2) return 1.0;
  double mx = 0, my = 0;
  for (const Point2& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double vx = 0, vy = 0;
  for (const Point2& p : points) {
    vx += (p.x - mx) * (p.x - mx);
    vy += (p.y - my) * (p.y - my);
  }
  const double sd = 0.5 * (std::sqrt(vx / (n - 1)) + std::sqrt(vy / (n - 1)));
  if (!(sd > 0.0)) return 1.0;
  return std::pow(n, -1.0 / 6.0) * sd;
}

double DensityRaster::Mass() const {
  double total = 0.0;
  for (double v : grid.data()) total += v;
  return total * cell_area();
}

absl::StatusOr<DensityRaster> KdeDensity(std::span<const Point2> points,
                                         const Bounds& bounds, double bandwidth,
                                         int resolution,
                                         std::string owner_scope) {
  if (resolution < 1) return absl::InvalidArgumentError("resolution must be >= 1");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    return absl::InvalidArgumentError("bandwidth must be positive");
  }
  if (!(bounds.width() > 0.0) || !(bounds.height() > 0.0)) {
    return absl::InvalidArgumentError("bounds must have positive extent");
  }
  const auto r = static_cast<size_t>(resolution);
  DensityRaster out;
  out.resolution = resolution;
  out.bounds = bounds;
  out.bandwidth = bandwidth;
  out.owner_scope = std::move(owner_scope);
  out.point_count = points.size();
  out.grid = RealMatrix(r, r, 0.0);
  if (points.empty()) return out;

  const double inv_area = 1.0 / out.cell_area();
  RealMatrix row_weights(points.size(), r), col_weights(points.size(), r);
  for (size_t p = 0; p < points.size(); ++p) {
    if (!bounds.Contains(points[p])) {
      return absl::InvalidArgumentError(
          absl::StrCat("point ", p, " lies outside the raster bounds"));
    }
    const auto wy = CellWeights(points[p].y, bandwidth, bounds.ymin,
                                bounds.ymax, resolution);
    const auto wx = CellWeights(points[p].x, bandwidth, bounds.xmin,
                                bounds.xmax, resolution);
    for (size_t i = 0; i < r; ++i) {
      row_weights(p, i) = wy[i] * inv_area;
      col_weights(p, i) = wx[i];
    }
  }
  kernels::AccumulateSeparable(row_weights, col_weights, &out.grid);
  return out;
}

std::string SerializeRaster(const DensityRaster& raster) {
  const nlohmann::json header = {{"resolution", raster.resolution},
                                 {"bounds", BoundsToJson(raster.bounds)},
                                 {"bandwidth", raster.bandwidth},
                                 {"owner_scope", raster.owner_scope},
                                 {"point_count", raster.point_count},
                                 {"dtype", "float32"},
                                 {"byte_order", "little"}};
  const std::string h = header.dump();
  std::string out;
  out.reserve(4 + h.size() + raster.grid.size() * 4);
  PutU32Le(out, static_cast<uint32_t>(h.size()));
  out += h;
  for (double v : raster.grid.data()) {
    PutU32Le(out, std::bit_cast<uint32_t>(static_cast<float>(v)));
  }
  return out;
}

absl::StatusOr<DensityRaster> ParseRaster(std::string_view bytes) {
  if (bytes.size() < 4) return absl::DataLossError("raster: missing header length");
  const uint32_t hlen = GetU32Le(bytes, 0);
  if (bytes.size() < 4 + static_cast<size_t>(hlen)) {
    return absl::DataLossError("raster: truncated header");
  }
  DensityRaster out;
  try {
    const auto header = nlohmann::json::parse(bytes.substr(4, hlen));
    out.resolution = header.at("resolution").get<int>();
    auto b = BoundsFromJson(header.at("bounds"));
    if (!b.ok()) return b.status();
    out.bounds = *b;
    out.bandwidth = header.at("bandwidth").get<double>();
    out.owner_scope = header.at("owner_scope").get<std::string>();
    out.point_count = header.at("point_count").get<size_t>();
    if (header.value("dtype", "") != "float32" ||
        header.value("byte_order", "") != "little") {
      return absl::InvalidArgumentError("raster: unsupported encoding");
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("raster header: ", e.what()));
  }
  if (out.resolution < 1 || out.resolution > 1 << 14) {
    return absl::InvalidArgumentError("raster: bad resolution");
  }
  const auto r = static_cast<size_t>(out.resolution);
  const size_t body = 4 + hlen;
  if (bytes.size() != body + r * r * 4) {
    return absl::DataLossError(absl::StrCat("raster: expected ", r * r * 4,
                                            " body bytes, got ",
                                            bytes.size() - body));
  }
  out.grid = RealMatrix(r, r);
  for (size_t i = 0; i < r * r; ++i) {
    out.grid.data()[i] = std::bit_cast<float>(GetU32Le(bytes, body + 4 * i));
  }
  return out;
}

}  // namespace jtsne::aggregate
