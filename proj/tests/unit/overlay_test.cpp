#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "boost_oracle.hpp"
#include "oracles.hpp"
#include "raid/geometry.hpp"

using namespace raid::geometry;
using raid::testing::TestRng;

namespace {

PolygonSet from_ring(const Ring& r) { return PolygonSet({Polygon{r, {}}}); }

PolygonSet random_shape(TestRng& g) {
  return from_ring(raid::testing::random_convex(g, {g.range(-10, 10), g.range(-10, 10)}, g.range(2, 15),
                                                g.range(2, 15), g.integer(3, 14)));
}

void expect_valid(const PolygonSet& p) {
  std::string why;
  EXPECT_TRUE(raid::testing::boost_valid(p, &why)) << why;
}

}  // namespace

TEST(Overlay, UnionOfOverlappingSquares) {
  const auto u = unite(PolygonSet::rectangle(0, 0, 2, 2), PolygonSet::rectangle(1, 1, 3, 3));
  EXPECT_NEAR(area(u), 7.0, 1e-12);
  EXPECT_EQ(u.polygons().size(), 1u);
  expect_valid(u);
}

TEST(Overlay, DifferenceMakesHole) {
  const auto d = difference(PolygonSet::rectangle(0, 0, 4, 4), PolygonSet::rectangle(1, 1, 2, 2));
  ASSERT_EQ(d.polygons().size(), 1u);
  EXPECT_EQ(d.polygons()[0].holes.size(), 1u);
  EXPECT_NEAR(area(d), 15.0, 1e-12);
  expect_valid(d);
}

TEST(Overlay, SharedEdgeUnionMerges) {
  const auto u = unite(PolygonSet::rectangle(0, 0, 1, 1), PolygonSet::rectangle(1, 0, 2, 1));
  EXPECT_NEAR(area(u), 2.0, 1e-12);
  EXPECT_EQ(u.polygons().size(), 1u);
  expect_valid(u);
}

TEST(Overlay, CornerTouchKeepsTwoPolygons) {
  const auto u = unite(PolygonSet::rectangle(0, 0, 1, 1), PolygonSet::rectangle(1, 1, 2, 2));
  EXPECT_NEAR(area(u), 2.0, 1e-12);
  EXPECT_EQ(u.polygons().size(), 2u);
  expect_valid(u);
}

TEST(Overlay, IdenticalOperands) {
  const auto a = PolygonSet::disk({1, 2}, 3.0, 40);
  EXPECT_NEAR(area(unite(a, a)), area(a), 1e-9);
  EXPECT_NEAR(area(intersection(a, a)), area(a), 1e-9);
  EXPECT_NEAR(area(difference(a, a)), 0.0, 1e-9);
}

TEST(Overlay, EmptyOperands) {
  const auto a = PolygonSet::rectangle(0, 0, 1, 1);
  EXPECT_NEAR(area(unite(a, PolygonSet{})), 1.0, 1e-12);
  EXPECT_TRUE(intersection(a, PolygonSet{}).empty());
  EXPECT_NEAR(area(difference(a, PolygonSet{})), 1.0, 1e-12);
  EXPECT_TRUE(difference(PolygonSet{}, a).empty());
}

TEST(Overlay, RandomConvexMatchesBoost) {
  TestRng g(21);
  for (int t = 0; t < 300; ++t) {
    const auto a = random_shape(g);
    const auto b = random_shape(g);
    const double tol = 1e-9 * std::max(1.0, area(a) + area(b));
    const auto u = unite(a, b);
    const auto d = difference(a, b);
    EXPECT_NEAR(area(u), raid::testing::boost_union_area(a, b), tol);
    EXPECT_NEAR(area(d), raid::testing::boost_difference_area(a, b), tol);
    // Inclusion-exclusion ties the three operations together.
    EXPECT_NEAR(area(u), area(a) + area(b) - intersection_area(a, b), tol);
    expect_valid(u);
    expect_valid(d);
  }
}

TEST(Overlay, MultiPartUnionMatchesRaster) {
  TestRng g(22);
  for (int t = 0; t < 10; ++t) {
    std::vector<PolygonSet> parts;
    for (int i = 0; i < 6; ++i) parts.push_back(random_shape(g));
    const auto u = unite(std::span<const PolygonSet>(parts));
    expect_valid(u);
    // Union membership by direct any-of test on a raster.
    const auto b = u.bounds();
    const int n = 300;
    long hits = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Point2 q{b.min_x + (i + 0.5) * b.width() / n, b.min_y + (j + 0.5) * b.height() / n};
        bool any = false;
        for (const auto& p : parts) any = any || raid::testing::inside_even_odd(raid::testing::rings_of(p), q);
        hits += any;
      }
    }
    const double want = hits * b.width() * b.height() / (n * n);
    EXPECT_NEAR(area(u), want, 0.01 * want);
  }
}

TEST(Overlay, CollinearOverlapAndNestedOperands) {
  const auto outer = PolygonSet::rectangle(0, 0, 10, 10);
  const auto inner = PolygonSet::rectangle(0, 2, 5, 8);  // shares part of the left edge
  EXPECT_NEAR(area(unite(outer, inner)), 100.0, 1e-12);
  EXPECT_NEAR(area(intersection(outer, inner)), 30.0, 1e-12);
  const auto d = difference(outer, inner);
  EXPECT_NEAR(area(d), 70.0, 1e-12);
  expect_valid(d);
}

TEST(Overlay, ClipToBounds) {
  const auto disk = PolygonSet::disk({0, 0}, 2.0, 64);
  const auto c = clip_to_bounds(disk, {0, 0, 10, 10});
  EXPECT_NEAR(area(c), area(disk) / 4.0, 1e-9);
  EXPECT_TRUE(clip_to_bounds(disk, {5, 5, 6, 6}).empty());
  expect_valid(c);
}

TEST(Overlay, AnnulusUnionFillsHole) {
  const auto ring = PolygonSet::annulus({0, 0}, 1.0, 2.0, 48);
  const auto filled = unite(ring, PolygonSet::disk({0, 0}, 1.0, 48));
  EXPECT_NEAR(area(filled), area(PolygonSet::disk({0, 0}, 2.0, 48)), 1e-9);
  for (const auto& p : filled.polygons()) EXPECT_TRUE(p.holes.empty());
}
