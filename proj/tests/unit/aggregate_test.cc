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

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "jtsne/aggregate/artifact.h"
#include "jtsne/aggregate/density.h"
#include "jtsne/aggregate/grid.h"

namespace jtsne::aggregate {
namespace {

std::vector<Point2> RandomPoints(size_t n, uint64_t seed, double spread = 5.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, spread);
  std::vector<Point2> pts(n);
  for (auto& p : pts) p = {d(rng), d(rng)};
  return pts;
}

TEST(KdeDensityTest, SinglePointPeaksAtItsCell) {
  const Bounds b{0, 10, 0, 10};
  const std::vector<Point2> pts = {{3.3, 7.7}};
  auto r = KdeDensity(pts, b, 0.4, 50);
  ASSERT_TRUE(r.ok());
  size_t best = 0;
  for (size_t i = 0; i < r->grid.size(); ++i) {
    if (r->grid.data()[i] > r->grid.data()[best]) best = i;
  }
  EXPECT_EQ(best / 50, static_cast<size_t>(CellIndex(7.7, 0, 10, 50)));
  EXPECT_EQ(best % 50, static_cast<size_t>(CellIndex(3.3, 0, 10, 50)));
}

TEST(KdeDensityTest, MassEqualsPointCount) {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pts = RandomPoints(100 * seed, seed);
    const double h = ScottBandwidth(pts);
    auto b = BoundingBox(pts, 3 * h);
    ASSERT_TRUE(b.ok());
    for (double scale : {0.1, 1.0, 4.0}) {
      auto r = KdeDensity(pts, *b, h * scale, 64);
      ASSERT_TRUE(r.ok());
      EXPECT_NEAR(r->Mass(), static_cast<double>(pts.size()),
                  1e-6 * static_cast<double>(pts.size()));
    }
  }
}

TEST(KdeDensityTest, PartitionRastersSumToGlobal) {
  const auto pts = RandomPoints(300, 7);
  const double h = ScottBandwidth(pts);
  auto b = BoundingBox(pts, 3 * h);
  ASSERT_TRUE(b.ok());
  std::vector<Point2> a(pts.begin(), pts.begin() + 120),
      c(pts.begin() + 120, pts.end());
  auto global = KdeDensity(pts, *b, h, 128);
  auto ra = KdeDensity(a, *b, h, 128);
  auto rc = KdeDensity(c, *b, h, 128);
  ASSERT_TRUE(global.ok() && ra.ok() && rc.ok());
  for (size_t i = 0; i < global->grid.size(); ++i) {
    EXPECT_NEAR(global->grid.data()[i], ra->grid.data()[i] + rc->grid.data()[i],
                1e-9 * std::max(1.0, global->grid.data()[i]));
  }
}

TEST(KdeDensityTest, EmptyScopeIsZero) {
  auto r = KdeDensity({}, Bounds{0, 1, 0, 1}, 0.1, 8);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->Mass(), 0.0);
}

TEST(KdeDensityTest, RejectsBadArguments) {
  const std::vector<Point2> pts = {{5, 5}};
  EXPECT_FALSE(KdeDensity(pts, Bounds{0, 1, 0, 1}, 0.1, 8).ok());
  EXPECT_FALSE(KdeDensity(pts, Bounds{0, 10, 0, 10}, 0.0, 8).ok());
  EXPECT_FALSE(KdeDensity(pts, Bounds{0, 10, 0, 10}, 1.0, 0).ok());
}

TEST(ScottBandwidthTest, MatchesFormula) {
  const std::vector<Point2> pts = {{0, 0}, {2, 0}, {0, 4}, {2, 4}};
  // sd_x = sqrt(4/3), sd_y = sqrt(16/3)
  const double sd = 0.5 * (std::sqrt(4.0 / 3) + std::sqrt(16.0 / 3));
  EXPECT_NEAR(ScottBandwidth(pts), std::pow(4.0, -1.0 / 6) * sd, 1e-15);
}

TEST(RasterCodecTest, RoundTripAndLayout) {
  const auto pts = RandomPoints(40, 8);
  auto b = BoundingBox(pts, 1.0);
  auto r = KdeDensity(pts, *b, 1.0, 16, "alice");
  ASSERT_TRUE(r.ok());
  const std::string bytes = SerializeRaster(*r);
  const uint32_t hlen = static_cast<unsigned char>(bytes[0]) |
                        static_cast<unsigned char>(bytes[1]) << 8 |
                        static_cast<unsigned char>(bytes[2]) << 16 |
                        static_cast<unsigned char>(bytes[3]) << 24;
  EXPECT_EQ(bytes.size(), 4 + hlen + 16 * 16 * 4);
  EXPECT_EQ(bytes[4], '{');
  auto back = ParseRaster(bytes);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->owner_scope, "alice");
  EXPECT_EQ(back->bounds, r->bounds);
  for (size_t i = 0; i < r->grid.size(); ++i) {
    EXPECT_EQ(back->grid.data()[i],
              static_cast<double>(static_cast<float>(r->grid.data()[i])));
  }
  EXPECT_EQ(SerializeRaster(*back), bytes);
  EXPECT_EQ(ParseRaster(bytes.substr(0, bytes.size() - 1)).status().code(),
            absl::StatusCode::kDataLoss);
}

TEST(GridCountsTest, SinglePointOccupiesOneCell) {
  const std::vector<Point2> pts = {{0.55, 0.25}};
  const std::vector<size_t> owner = {0};
  auto g = ComputeGridCounts(pts, owner, {"a"}, Bounds{0, 1, 0, 1}, 20);
  ASSERT_TRUE(g.ok());
  int nonzero = 0;
  for (int r = 0; r < 20; ++r) {
    for (int c = 0; c < 20; ++c) {
      if (g->CellTotal(r, c) > 0) {
        ++nonzero;
        EXPECT_EQ(g->CellTotal(r, c), 1u);
        EXPECT_EQ(r, 4);
        EXPECT_EQ(c, 10);
      }
    }
  }
  EXPECT_EQ(nonzero, 1);
}

TEST(GridCountsTest, EdgesGoToLowerCell) {
  EXPECT_EQ(CellIndex(0.0, 0, 1, 4), 0);
  EXPECT_EQ(CellIndex(0.25, 0, 1, 4), 0);
  EXPECT_EQ(CellIndex(0.2500001, 0, 1, 4), 1);
  EXPECT_EQ(CellIndex(0.5, 0, 1, 4), 1);
  EXPECT_EQ(CellIndex(1.0, 0, 1, 4), 3);
}

TEST(GridCountsTest, ConservesTotalsAcrossOwners) {
  const auto pts = RandomPoints(500, 9);
  std::vector<size_t> owner(500);
  for (size_t i = 0; i < 500; ++i) owner[i] = i % 3;
  auto b = BoundingBox(pts, 0.0);
  auto g = ComputeGridCounts(pts, owner, {"a", "b", "c"}, *b, 20);
  ASSERT_TRUE(g.ok());
  EXPECT_EQ(g->Total(), 500u);
  std::vector<uint64_t> per_owner(3, 0);
  for (int r = 0; r < 20; ++r) {
    for (int c = 0; c < 20; ++c) {
      for (size_t o = 0; o < 3; ++o) per_owner[o] += g->At(r, c, o);
    }
  }
  EXPECT_EQ(per_owner[0], 167u);
  EXPECT_EQ(per_owner[1], 167u);
  EXPECT_EQ(per_owner[2], 166u);
  auto back = GridCounts::FromJson(g->ToJson());
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->counts, g->counts);
}

TEST(GridCountsTest, UniformPointsPassChiSquared) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point2> pts(10000);
  for (auto& p : pts) p = {u(rng), u(rng)};
  const std::vector<size_t> owner(pts.size(), 0);
  auto g = ComputeGridCounts(pts, owner, {"a"}, Bounds{0, 1, 0, 1}, 20);
  ASSERT_TRUE(g.ok());
  const double expected = 10000.0 / 400.0;
  double chi2 = 0.0;
  for (int r = 0; r < 20; ++r) {
    for (int c = 0; c < 20; ++c) {
      const double diff = g->CellTotal(r, c) - expected;
      chi2 += diff * diff / expected;
    }
  }
  const boost::math::chi_squared dist(399);
  EXPECT_LT(chi2, boost::math::quantile(dist, 1.0 - 0.001));
}

class ArtifactTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto pts = RandomPoints(30, 11);
    y_ = RealMatrix(30, 2);
    for (size_t i = 0; i < 30; ++i) {
      y_(i, 0) = pts[i].x;
      y_(i, 1) = pts[i].y;
      owner_of_.push_back(i < 12 ? "alice" : "bob");
      labels_.push_back(i % 2 ? std::optional<std::string>("odd") : std::nullopt);
    }
  }
  absl::StatusOr<EmbeddingArtifact> Export(VisualizationMode mode) {
    ExportOptions opts;
    opts.raster_resolution = 32;
    return ExportArtifact("t1", y_, {"alice", "bob"}, owner_of_, labels_, mode,
                          opts);
  }
  RealMatrix y_;
  std::vector<std::string> owner_of_;
  std::vector<std::optional<std::string>> labels_;
};

TEST_F(ArtifactTest, ScatterplotViewHasEveryPoint) {
  auto a = Export(VisualizationMode::kScatterplot);
  ASSERT_TRUE(a.ok());
  const auto view = ViewFor(*a, "alice");
  EXPECT_EQ(view.points.size(), 30u);
  EXPECT_EQ(view.TotalPoints(), 30u);
  for (const auto& p : view.points) EXPECT_TRUE(view.bounds.Contains({p.x, p.y}));
  EXPECT_EQ(view.points[1].label, "odd");
}

TEST_F(ArtifactTest, DensityViewWithholdsForeignPoints) {
  auto a = Export(VisualizationMode::kDensity);
  ASSERT_TRUE(a.ok());
  const auto view = ViewFor(*a, "alice");
  EXPECT_EQ(view.points.size(), 12u);
  for (const auto& p : view.points) EXPECT_EQ(p.owner_id, "alice");
  EXPECT_EQ(view.grid.Total(), 30u);
  EXPECT_NEAR(view.global_density.Mass(), 30.0, 30e-6);
  ASSERT_EQ(view.owner_density.size(), 2u);
  for (size_t i = 0; i < view.global_density.grid.size(); ++i) {
    EXPECT_NEAR(view.global_density.grid.data()[i],
                view.owner_density[0].grid.data()[i] +
                    view.owner_density[1].grid.data()[i],
                1e-9);
  }
  const std::string dumped = view.ToJson().dump();
  EXPECT_EQ(dumped.find("\"bob\",\"x\""), std::string::npos);
}

TEST_F(ArtifactTest, JsonRoundTrip) {
  auto a = Export(VisualizationMode::kDensity);
  ASSERT_TRUE(a.ok());
  const auto j = a->ToJson();
  auto back = EmbeddingArtifact::FromJson(j);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->points, a->points);
  EXPECT_EQ(back->grid.counts, a->grid.counts);
  EXPECT_EQ(back->ToJson(), j);
  EXPECT_FALSE(EmbeddingArtifact::FromJson(nlohmann::json{{"mode", "x"}}).ok());
}

TEST_F(ArtifactTest, AttachesOnlyOwnAttributes) {
  auto a = Export(VisualizationMode::kScatterplot);
  ASSERT_TRUE(a.ok());
  auto view = ViewFor(*a, "alice");
  RealMatrix attrs(12, 3, 1.5);
  ASSERT_TRUE(AttachLocalAttributes(view, "alice", attrs).ok());
  for (const auto& p : view.points) {
    EXPECT_EQ(p.attributes.empty(), p.owner_id != "alice");
  }
  EXPECT_FALSE(AttachLocalAttributes(view, "alice", RealMatrix(5, 3)).ok());
  EXPECT_TRUE(ViewFor(view, "bob").points[0].attributes.empty());
}

TEST(ModeTest, ParsesNames) {
  EXPECT_EQ(*ParseMode("scatter"), VisualizationMode::kScatterplot);
  EXPECT_EQ(*ParseMode("density"), VisualizationMode::kDensity);
  EXPECT_FALSE(ParseMode("heat").ok());
}

}  // namespace
}  // namespace jtsne::aggregate
