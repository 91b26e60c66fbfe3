#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "raid/baseline.hpp"
#include "raid/error.hpp"

using namespace raid;
using namespace raid::descriptor;
using geometry::Polygon;
using geometry::Ring;
using raid::testing::TestRng;

namespace {

PolygonSet from_ring(const Ring& r) { return PolygonSet({Polygon{r, {}}}); }

}  // namespace

TEST(ShapeContext, ShapeKindAndNormalization) {
  const auto src = PolygonSet::rectangle(100, 100, 120, 120);
  const auto tgt = PolygonSet::rectangle(115, 90, 160, 130);
  const auto d = baseline::shape_context(src, tgt);
  EXPECT_EQ(d.kind, DescriptorKind::ShapeContext);
  EXPECT_EQ(d.shape, (DescriptorShape{8, 2, 1, 1}));
  ASSERT_EQ(d.size(), 16u);
  EXPECT_NEAR(d.sum(), 1.0, 1e-12);
  EXPECT_NEAR(d.r_max, compute_r_max(src), 1e-12);
}

TEST(ShapeContext, EqualsNormalizedCentroidHistogram) {
  TestRng g(51);
  for (int t = 0; t < 20; ++t) {
    const auto S = from_ring(raid::testing::random_convex(g, {128, 128}, g.range(5, 30), g.range(5, 30), 8));
    const auto T = from_ring(raid::testing::random_convex(g, {g.range(100, 156), g.range(100, 156)},
                                                          g.range(5, 30), g.range(5, 30), 8));
    const auto h = point_histogram(geometry::centroid(S), T, compute_r_max(S));
    double total = 0.0;
    for (double v : h.bins) total += v;
    if (total == 0.0) continue;
    const auto d = baseline::shape_context(S, T);
    for (std::size_t b = 0; b < 16; ++b) EXPECT_NEAR(d.values[b], h.bins[b] / total, 1e-12);
  }
}

TEST(ShapeContext, MatchesPointLikeRaidOuterBins) {
  // A source far smaller than the sample pitch: every RAID outer bin holds
  // the centroid histogram, so any outer-bin slice, renormalized, is SC.
  const auto S = PolygonSet::disk({128.3, 127.9}, 0.6, 16);
  const auto T = PolygonSet::rectangle(128.5, 127, 135, 140);
  const auto sc = baseline::shape_context(S, T);
  const auto rd = raid_unnormalized(S, T, {256, 256});
  for (std::size_t o = 0; o < 16; ++o) {
    double total = 0.0;
    for (std::size_t b = 0; b < 16; ++b) total += rd.values[b * 16 + o];
    double l1 = 0.0;
    for (std::size_t b = 0; b < 16; ++b) l1 += std::abs(rd.values[b * 16 + o] / total - sc.values[b]);
    EXPECT_LE(l1, 1e-9) << "outer bin " << o;
  }
}

TEST(ShapeContext, EmptyTargetRejected) {
  const auto S = PolygonSet::rectangle(0, 0, 1, 1);
  try {
    baseline::shape_context(S, PolygonSet{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyRelationship);
  }
  try {
    baseline::shape_context(S, PolygonSet::rectangle(10, 10, 11, 11));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyRelationship);
  }
}

TEST(ShapeContext, DegenerateSource) {
  try {
    baseline::shape_context(PolygonSet{}, PolygonSet::rectangle(0, 0, 1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateRegion);
  }
}

TEST(ShapeContext, HalfPlaneMassOnTheRightMatchesMonteCarlo) {
  // Square source centered at the origin, target the half-plane x > 0.
  const auto S = PolygonSet::rectangle(-1, -1, 1, 1);
  const Ring half{{0, -100}, {100, -100}, {100, 100}, {0, 100}};
  const auto d = baseline::shape_context(S, from_ring(half));
  double right = 0.0, left = 0.0;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 2; ++j) (i == 3 || i == 4 || i == 5 ? left : right) += d.at(i, j);
  }
  EXPECT_NEAR(left, 0.0, 1e-12);
  EXPECT_NEAR(right, 1.0, 1e-12);

  TestRng g(52);
  const double rm = compute_r_max(S);
  const auto mc = raid::testing::mc_point_histogram({0, 0}, {half}, rm, 8, 2, 64, 100000, g);
  double mc_total = 0.0;
  for (const auto& e : mc) mc_total += e.value;
  // Total coverage is 8 bins' worth (4 full + 2 x 2 half); compare unnormalized.
  for (std::size_t b = 0; b < 16; ++b) {
    EXPECT_LE(std::abs(d.values[b] * 8.0 - mc[b].value), 3.0 * mc[b].standard_error) << b;
  }
  EXPECT_NEAR(mc_total, 8.0, 0.05);
}
