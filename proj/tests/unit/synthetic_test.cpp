#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>

#include "raid/baseline.hpp"
#include "raid/descriptor.hpp"
#include "raid/error.hpp"
#include "raid/synthetic.hpp"

using namespace raid;
using namespace raid::synthetic;
using geometry::Point2;

namespace {

// Andrew's monotone chain, used as an independent hull.
std::vector<Point2> hull(std::vector<Point2> p) {
  std::sort(p.begin(), p.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<Point2> h(2 * p.size());
  std::size_t k = 0;
  auto turn = [](Point2 o, Point2 a, Point2 b) { return geometry::cross(a - o, b - o); };
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && turn(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && turn(h[k - 2], h[k - 1], p[i - 1]) <= 0) --k;
    h[k++] = p[i - 1];
  }
  h.resize(k - 1);
  return h;
}

bool inside_convex(const std::vector<Point2>& h, Point2 q) {
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (geometry::cross(h[(i + 1) % h.size()] - h[i], q - h[i]) < 0) return false;
  }
  return true;
}

}  // namespace

TEST(Synthetic, DesignNames) {
  EXPECT_EQ(design_names().size(), 10u);
  EXPECT_EQ(design_names().back(), "none");
  EXPECT_EQ(relationship_classes().size(), 9u);
}

TEST(Synthetic, DeterministicForSeed) {
  for (const auto& d : design_names()) {
    const auto a = generate_synthetic(d, 10, 17);
    const auto b = generate_synthetic(d, 10, 17);
    ASSERT_EQ(a.size(), 10u);
    for (std::size_t i = 0; i < a.size(); ++i) {
      ASSERT_EQ(a[i].source.polygons().size(), b[i].source.polygons().size());
      EXPECT_EQ(a[i].source.polygons()[0].outer, b[i].source.polygons()[0].outer);
      EXPECT_EQ(a[i].target().polygons()[0].outer, b[i].target().polygons()[0].outer);
      EXPECT_EQ(a[i].classes, b[i].classes);
    }
  }
  EXPECT_NE(generate_synthetic("crossing", 1, 1)[0].source.polygons()[0].outer,
            generate_synthetic("crossing", 1, 2)[0].source.polygons()[0].outer);
}

TEST(Synthetic, SurroundingTargetCentroidInsideSourceHull) {
  for (const auto& p : generate_synthetic("surrounding", 40, 3)) {
    std::vector<Point2> pts;
    for (const auto& poly : p.source.polygons()) pts.insert(pts.end(), poly.outer.begin(), poly.outer.end());
    EXPECT_TRUE(inside_convex(hull(pts), geometry::centroid(p.target())));
    EXPECT_EQ(p.classes, (std::set<std::string>{"surrounding"}));
  }
}

TEST(Synthetic, EveryPairPassesDescriptorPreconditions) {
  const descriptor::ImageFrame frame{kFrameSize, kFrameSize};
  for (const auto& d : design_names()) {
    for (const auto& p : generate_synthetic(d, 20, 4)) {
      const auto r = descriptor::raid(p.source, p.target(), frame);
      EXPECT_NEAR(r.sum(), 1.0, 1e-6);
      EXPECT_NO_THROW(baseline::shape_context(p.source, p.target()));
      const auto b = geometry::unite(p.source, p.target()).bounds();
      EXPECT_GE(b.min_x, 0.0);
      EXPECT_LE(b.max_x, kFrameSize);
      EXPECT_GE(b.min_y, 0.0);
      EXPECT_LE(b.max_y, kFrameSize);
    }
  }
}

TEST(Synthetic, UnknownDesign) {
  try {
    generate_synthetic("levitating", 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadRequest);
  }
}

TEST(Synthetic, DatasetLayoutAndFiles) {
  const auto s = build_synthetic({"bridging", "none"}, 3, 8);
  ASSERT_EQ(s.data.images.size(), 6u);
  EXPECT_EQ(s.data.images[0].image_id, "1");
  EXPECT_EQ(s.labels.size(), 6u);
  EXPECT_EQ(s.labels[0].classes, (std::set<std::string>{"bridging"}));
  EXPECT_TRUE(s.labels[5].classes.empty());
  EXPECT_EQ(s.data.images[0].regions[0].label, "source");
  // Bridging has two pillars as separate target regions.
  EXPECT_GE(s.data.images[0].regions.size(), 3u);
  const auto dir = std::filesystem::temp_directory_path() / "raid_synthetic_test";
  write_synthetic(s, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "annotations.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "labels.json"));
  const auto back = dataset::load_annotations(dir / "annotations.json");
  EXPECT_EQ(back.images.size(), 6u);
  std::filesystem::remove_all(dir);
}
