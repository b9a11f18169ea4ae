#include "roadsentry/roi_geometry.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

namespace roadsentry {
namespace {

std::vector<oracle::Pt> to_oracle(const Polygon& p) {
  std::vector<oracle::Pt> out;
  for (const auto& v : p.vertices()) out.push_back({v.x(), v.y()});
  return out;
}

bool has_vertex(const Polygon& p, double x, double y) {
  for (const auto& v : p.vertices()) {
    if (std::abs(v.x() - x) < 1e-9 && std::abs(v.y() - y) < 1e-9) return true;
  }
  return false;
}

TEST(FixedRoi, Type2On1280x720) {
  const Polygon p = build_fixed_roi(roi_preset(2), {1280, 720});
  ASSERT_EQ(p.size(), 4u);
  EXPECT_TRUE(has_vertex(p, 192, 719));
  EXPECT_TRUE(has_vertex(p, 1088, 719));
  EXPECT_TRUE(has_vertex(p, 576, 324));
  EXPECT_TRUE(has_vertex(p, 704, 324));
  EXPECT_LT(signed_area(p.vertices()), 0.0);
  EXPECT_DOUBLE_EQ(horizon_row(roi_preset(2), {1280, 720}), 324.0);
}

TEST(FixedRoi, Type1On1000x1000) {
  const Polygon p = build_fixed_roi(roi_preset(1), {1000, 1000});
  EXPECT_TRUE(has_vertex(p, 100, 999));
  EXPECT_TRUE(has_vertex(p, 900, 999));
  EXPECT_TRUE(has_vertex(p, 450, 450));
  EXPECT_TRUE(has_vertex(p, 550, 450));
}

TEST(FixedRoi, PresetFractions) {
  EXPECT_DOUBLE_EQ(roi_preset(1).left_base_frac, 0.10);
  EXPECT_DOUBLE_EQ(roi_preset(1).right_base_frac, 0.90);
  EXPECT_DOUBLE_EQ(roi_preset(3).left_base_frac, 0.20);
  EXPECT_DOUBLE_EQ(roi_preset(3).right_base_frac, 0.80);
  EXPECT_DOUBLE_EQ(roi_preset(2).horizon_frac, 0.45);
  EXPECT_THROW(roi_preset(4), std::invalid_argument);
}

TEST(FixedRoi, PresetsNest) {
  const FrameDims dims{1280, 720};
  const Polygon t1 = build_fixed_roi(roi_preset(1), dims);
  const Polygon t2 = build_fixed_roi(roi_preset(2), dims);
  const Polygon t3 = build_fixed_roi(roi_preset(3), dims);
  for (const auto& v : t2.vertices()) EXPECT_TRUE(point_in_polygon(v, t1));
  for (const auto& v : t3.vertices()) EXPECT_TRUE(point_in_polygon(v, t2));
  EXPECT_GT(t1.area(), t2.area());
  EXPECT_GT(t2.area(), t3.area());
  // Points just inside a base corner of a wider type are outside the narrower.
  EXPECT_TRUE(point_in_polygon({130, 718}, t1));
  EXPECT_FALSE(point_in_polygon({130, 718}, t2));
  EXPECT_TRUE(point_in_polygon({200, 718}, t2));
  EXPECT_FALSE(point_in_polygon({200, 718}, t3));
}

TEST(FixedRoi, WideningNeverRemovesPoints) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ux(0, 1280), uy(0, 720), uf(0.0, 0.4);
  for (int trial = 0; trial < 200; ++trial) {
    RoiSpec narrow;
    narrow.left_base_frac = 0.05 + uf(rng);
    narrow.right_base_frac = 0.95 - uf(rng);
    RoiSpec wide = narrow;
    wide.left_base_frac -= 0.04;
    wide.right_base_frac += 0.04;
    const Polygon a = build_fixed_roi(narrow, {1280, 720});
    const Polygon b = build_fixed_roi(wide, {1280, 720});
    for (int i = 0; i < 50; ++i) {
      const PixelPoint p(ux(rng), uy(rng));
      if (point_in_polygon(p, a)) ASSERT_TRUE(point_in_polygon(p, b));
    }
  }
}

TEST(PointInPolygon, SquareCases) {
  const Polygon sq({{0, 0}, {10, 0}, {10, 10}, {0, 10}});
  EXPECT_TRUE(point_in_polygon({5, 5}, sq));
  EXPECT_FALSE(point_in_polygon({15, 5}, sq));
  EXPECT_TRUE(point_in_polygon({10, 5}, sq));
  EXPECT_TRUE(point_in_polygon({0, 0}, sq));
  EXPECT_TRUE(point_in_polygon({5, 10}, sq));
  EXPECT_FALSE(point_in_polygon({5, 10.001}, sq));
}

TEST(PointInPolygon, AgreesWithWindingOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nv(3, 14);
  std::uniform_real_distribution<double> u(-20, 120);
  long disagreements = 0;
  for (int k = 0; k < 50; ++k) {
    const auto verts = oracle::random_star_polygon(rng, nv(rng), {50, 50}, 5, 60);
    std::vector<PixelPoint> pts;
    for (const auto& v : verts) pts.emplace_back(v.x, v.y);
    const Polygon poly(pts);
    const auto ov = to_oracle(poly);
    for (int i = 0; i < 10000; ++i) {
      const PixelPoint p(u(rng), u(rng));
      if (point_in_polygon(p, poly) != oracle::winding_contains({p.x(), p.y()}, ov)) ++disagreements;
    }
    // Vertices and edge midpoints are on the boundary.
    for (std::size_t i = 0; i < poly.size(); ++i) {
      ASSERT_TRUE(point_in_polygon(poly[i], poly));
      ASSERT_TRUE(point_in_polygon(0.5 * (poly[i] + poly[(i + 1) % poly.size()]), poly));
    }
  }
  EXPECT_EQ(disagreements, 0);
}

TEST(PolygonTest, ValidatesAndOrients) {
  EXPECT_THROW(Polygon({{0, 0}, {1, 1}}), std::invalid_argument);
  EXPECT_THROW(Polygon({{0, 0}, {1, 1}, {2, 2}}), std::invalid_argument);
  EXPECT_THROW(Polygon({{0, 0}, {10, 10}, {10, 0}, {0, 10}}), std::invalid_argument);
  const Polygon cw({{0, 0}, {0, 10}, {10, 10}, {10, 0}});
  const Polygon ccw({{0, 0}, {10, 0}, {10, 10}, {0, 10}});
  EXPECT_LT(signed_area(cw.vertices()), 0);
  EXPECT_LT(signed_area(ccw.vertices()), 0);
  EXPECT_DOUBLE_EQ(cw.area(), 100);
}

TEST(ThreatCandidate, Examples) {
  const FrameDims dims{1280, 720};
  const RoiSpec spec = roi_preset(2);
  const Polygon roi = build_fixed_roi(spec, dims);
  const double hy = horizon_row(spec, dims);
  auto box_at = [](double cx, double cy) { return BBox{cx - 20, cy - 15, 40, 30}; };
  EXPECT_TRUE(is_threat_candidate(box_at(640, 600), roi, hy));
  EXPECT_FALSE(is_threat_candidate(box_at(640, 200), roi, hy));
  EXPECT_FALSE(is_threat_candidate(box_at(100, 700), roi, hy));
  // Centre exactly on the horizon is rejected even though it is on the top edge.
  EXPECT_FALSE(is_threat_candidate(box_at(640, 324), roi, hy));
}

TEST(ThreatCandidate, NothingAboveHorizon) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ux(-100, 1400), uy(-100, 324), us(1, 300);
  const Polygon big({{-1000, -1000}, {3000, -1000}, {3000, 3000}, {-1000, 3000}});
  for (int i = 0; i < 10000; ++i) {
    const double w = us(rng), h = us(rng);
    const double cy = uy(rng);
    const BBox b{ux(rng), cy - h / 2, w, h};
    ASSERT_FALSE(is_threat_candidate(b, big, 324.0));
  }
}

TEST(FixedRoi, ScalingConflictAtBaseRow) {
  // Base row sits at h-1, so doubling the frame does not double it exactly.
  const Polygon a = build_fixed_roi(roi_preset(2), {640, 360});
  const Polygon b = build_fixed_roi(roi_preset(2), {1280, 720});
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(b[i].x(), 2 * a[i].x());
    if (a[i].y() == 359) {
      EXPECT_DOUBLE_EQ(b[i].y(), 719);
    } else {
      EXPECT_DOUBLE_EQ(b[i].y(), 2 * a[i].y());
    }
  }
}

TEST(Clip, KeepsPartBelowLine) {
  const Polygon sq({{0, 0}, {10, 0}, {10, 10}, {0, 10}});
  const auto c = clip_below(sq, 4);
  ASSERT_TRUE(c.has_value());
  EXPECT_NEAR(c->area(), 60, 1e-12);
  EXPECT_FALSE(clip_below(sq, 10).has_value());
  EXPECT_FALSE(clip_below(sq, 11).has_value());
  EXPECT_NEAR(clip_below(sq, -5)->area(), 100, 1e-12);
}

}  // namespace
}  // namespace roadsentry
