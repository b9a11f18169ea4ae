#include "roadsentry/error.hpp"
#include "roadsentry/vision_prep.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

namespace roadsentry {
namespace {

oracle::Lens lens_of(const CameraIntrinsics& c) { return {c.fx, c.fy, c.cx, c.cy, c.k1, c.k2, c.k3, c.p1, c.p2}; }

TEST(Undistort, ZeroCoefficientsIsIdentity) {
  const CameraIntrinsics intr;
  const PixelPoint p = undistort_point({400, 300}, intr);
  EXPECT_EQ(p, PixelPoint(400, 300));
}

TEST(Undistort, PrincipalPointIsFixed) {
  CameraIntrinsics intr;
  intr.k1 = -0.25;
  intr.k2 = 0.05;
  intr.p1 = 0.001;
  const PixelPoint p = undistort_point({intr.cx, intr.cy}, intr);
  EXPECT_NEAR(p.x(), intr.cx, 1e-12);
  EXPECT_NEAR(p.y(), intr.cy, 1e-12);
}

TEST(Undistort, HandExampleK1) {
  CameraIntrinsics intr;
  intr.cx = 0;
  intr.cy = 0;
  intr.k1 = 0.1;
  const oracle::Pt d = oracle::distort({200, 0}, lens_of(intr));
  EXPECT_NEAR(d.x, 200.8, 1e-9);
  EXPECT_NEAR(d.y, 0.0, 1e-12);
  const PixelPoint lib = distort_point({200, 0}, intr);
  EXPECT_NEAR(lib.x(), d.x, 1e-9);
  const PixelPoint u = undistort_point({200.8, 0}, intr);
  EXPECT_NEAR(u.x(), 200.0, 1e-3);
  EXPECT_NEAR(u.y(), 0.0, 1e-3);
}

TEST(Undistort, ForwardModelMatchesOracleWithTangentialTerms) {
  CameraIntrinsics intr;
  intr.k1 = -0.2;
  intr.k2 = 0.03;
  intr.k3 = -0.004;
  intr.p1 = 0.0015;
  intr.p2 = -0.001;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(0, 1280), uy(0, 720);
  for (int i = 0; i < 200; ++i) {
    const PixelPoint p(ux(rng), uy(rng));
    const oracle::Pt o = oracle::distort({p.x(), p.y()}, lens_of(intr));
    const PixelPoint lib = distort_point(p, intr);
    EXPECT_NEAR(lib.x(), o.x, 1e-9);
    EXPECT_NEAR(lib.y(), o.y, 1e-9);
  }
}

TEST(Undistort, RoundTripOverGrid) {
  for (double k1 : {-0.3, -0.1, 0.1, 0.3}) {
    CameraIntrinsics intr;
    intr.k1 = k1;
    for (int i = 0; i < 40; ++i) {
      for (int j = 0; j < 25; ++j) {
        const PixelPoint ideal(i * 1279.0 / 39.0, j * 719.0 / 24.0);
        const oracle::Pt d = oracle::distort({ideal.x(), ideal.y()}, lens_of(intr));
        const PixelPoint back = undistort_point({d.x, d.y}, intr);
        ASSERT_LT((back - ideal).norm(), 1e-3) << "k1=" << k1 << " at " << ideal.transpose();
      }
    }
  }
}

TEST(Undistort, ExtremeCoefficientsFailLoudly) {
  CameraIntrinsics intr;
  // Forward radius r (1 - 5 r^2) never exceeds 0.172, so 0.36 has no preimage.
  intr.k1 = -5.0;
  EXPECT_THROW(undistort_point({1000, 360}, intr), NonConvergence);
}

TEST(UndistortImage, ZeroCoefficientsCopiesBytes) {
  ImageBuffer img(32, 16, 3);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 32; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>((x * 7 + y * 13 + c * 31) % 256);
  EXPECT_EQ(undistort_image(img, CameraIntrinsics{}), img);
}

TEST(UndistortImage, UniformGrayStaysUniformInside) {
  CameraIntrinsics intr;
  intr.fx = intr.fy = 100;
  intr.cx = 32;
  intr.cy = 24;
  intr.k1 = -0.05;
  const ImageBuffer img(64, 48, 1, 128);
  const ImageBuffer out = undistort_image(img, intr);
  EXPECT_EQ(out.width(), 64);
  EXPECT_EQ(out.height(), 48);
  // Pixels whose source lies in the frame interpolate a constant.
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) {
      const PixelPoint s = distort_point(PixelPoint(x, y), intr);
      if (s.x() >= 0 && s.x() <= 63 && s.y() >= 0 && s.y() <= 47) EXPECT_EQ(out.at(x, y), 128);
    }
  }
}

TEST(UndistortImage, PrincipalPixelStaysPut) {
  CameraIntrinsics intr;
  intr.fx = intr.fy = 100;
  intr.cx = 20;
  intr.cy = 10;
  intr.k1 = 0.2;
  ImageBuffer img(41, 21, 1, 0);
  img.at(20, 10) = 255;
  const ImageBuffer out = undistort_image(img, intr);
  EXPECT_EQ(out.at(20, 10), 255);
}

TEST(Hls, MatchesOracleOnRandomColours) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> u(0, 255);
  for (int i = 0; i < 5000; ++i) {
    const int r = u(rng), g = u(rng), b = u(rng);
    const Hls h = rgb_to_hls(static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b));
    const oracle::Hls o = oracle::hls(r, g, b);
    ASSERT_NEAR(h.l, o.l, 1e-12);
    ASSERT_NEAR(h.s, o.s, 1e-12);
    if (o.s > 0) ASSERT_NEAR(h.h, o.h, 1e-9) << r << "," << g << "," << b;
  }
}

TEST(Threshold, BlackIsEmptyWhiteAndYellowPass) {
  const ColorThresholds t;
  EXPECT_EQ(threshold_lane_pixels(ImageBuffer(8, 8, 3, 0), t), ImageBuffer(8, 8, 1, 0));
  const oracle::Hls yellow = oracle::hls(255, 255, 0);
  EXPECT_NEAR(yellow.h, 60.0, 1e-12);
  EXPECT_NEAR(yellow.l, 0.5, 1e-12);
  EXPECT_NEAR(yellow.s, 1.0, 1e-12);
  ImageBuffer img(2, 1, 3, 0);
  img.at(0, 0, 0) = img.at(0, 0, 1) = img.at(0, 0, 2) = 255;
  img.at(1, 0, 0) = img.at(1, 0, 1) = 255;
  const ImageBuffer mask = threshold_lane_pixels(img, t);
  EXPECT_EQ(mask.at(0, 0), 1);
  EXPECT_EQ(mask.at(1, 0), 1);
}

TEST(Threshold, BinaryAndMonotoneInLightness) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> u(0, 255);
  ImageBuffer img(64, 64, 3);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(u(rng));
  ColorThresholds lo;
  lo.lightness_min = 0.2;
  ColorThresholds hi = lo;
  hi.lightness_min = 0.6;
  const ImageBuffer a = threshold_lane_pixels(img, lo);
  const ImageBuffer b = threshold_lane_pixels(img, hi);
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    ASSERT_LE(a.data()[i], 1);
    ASSERT_LE(b.data()[i], a.data()[i]);
  }
}

TEST(Threshold, MatchesRuleFromOracle) {
  const ColorThresholds t;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> u(0, 255);
  ImageBuffer img(50, 50, 3);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(u(rng));
  const ImageBuffer mask = threshold_lane_pixels(img, t);
  for (int y = 0; y < 50; ++y) {
    for (int x = 0; x < 50; ++x) {
      const oracle::Hls o = oracle::hls(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
      const bool want = o.l >= 0.45 && ((o.s >= 0.35 && o.s <= 1.0) || (o.h >= 35 && o.h <= 65) || o.l >= 0.85);
      ASSERT_EQ(mask.at(x, y), want ? 1 : 0)
          << "rgb " << int(img.at(x, y, 0)) << ',' << int(img.at(x, y, 1)) << ',' << int(img.at(x, y, 2))
          << " hls " << o.h << ',' << o.l << ',' << o.s;
    }
  }
}

Quad square(double s) { return {PixelPoint(0, 0), PixelPoint(s, 0), PixelPoint(s, s), PixelPoint(0, s)}; }

TEST(Homography, UnitSquareIsIdentity) {
  const Homography h = compute_homography(square(1), square(1));
  EXPECT_TRUE(h.matrix().isApprox(Eigen::Matrix3d::Identity(), 1e-12));
}

TEST(Homography, PureScale) {
  const Homography h = compute_homography(square(2), square(1));
  const Eigen::Matrix3d want = Eigen::Vector3d(0.5, 0.5, 1).asDiagonal();
  EXPECT_LT((h.matrix() - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Homography, MapsCornersAndRoundTrips) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> jitter(-80, 80);
  for (int trial = 0; trial < 50; ++trial) {
    Quad src{PixelPoint(100, 100), PixelPoint(900, 120), PixelPoint(950, 700), PixelPoint(80, 650)};
    Quad dst{PixelPoint(0, 0), PixelPoint(500, 0), PixelPoint(500, 500), PixelPoint(0, 500)};
    for (auto& p : src) p += PixelPoint(jitter(rng), jitter(rng));
    const Homography h = compute_homography(src, dst);
    for (int i = 0; i < 4; ++i) ASSERT_LT((h.apply(src[i]) - dst[i]).norm(), 1e-6);
    ASSERT_LT((h.matrix() * h.inverse_matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    std::uniform_real_distribution<double> ux(150, 850), uy(200, 600);
    for (int i = 0; i < 100; ++i) {
      const PixelPoint q(ux(rng), uy(rng));
      ASSERT_LT((h.apply_inverse(h.apply(q)) - q).norm(), 1e-6);
    }
  }
}

TEST(Homography, CollinearQuadIsDegenerate) {
  const Quad bad{PixelPoint(0, 0), PixelPoint(1, 1), PixelPoint(2, 2), PixelPoint(0, 5)};
  EXPECT_THROW(compute_homography(bad, square(1)), DegenerateQuad);
  EXPECT_THROW(compute_homography(square(1), bad), DegenerateQuad);
}

TEST(Warp, IdentityReproducesInput) {
  ImageBuffer img(30, 20, 3);
  for (std::size_t i = 0; i < img.data().size(); ++i) img.data()[i] = static_cast<std::uint8_t>(i * 37 % 251);
  EXPECT_EQ(warp_image(img, Homography::identity()), img);
}

TEST(Warp, HalfScaleShrinksWhiteHalf) {
  ImageBuffer img(100, 100, 1, 0);
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 50; ++x) img.at(x, y) = 255;
  const Homography h = compute_homography(square(2), square(1));
  const ImageBuffer out = warp_image(img, h);
  // Content occupies [0, 49.5]^2; white where the source column is < 50.
  long white = 0, content = 0;
  for (int y = 0; y < 100; ++y) {
    for (int x = 0; x < 100; ++x) {
      if (x <= 49 && y <= 49) {
        ++content;
        if (out.at(x, y) > 127) ++white;
      } else {
        ASSERT_EQ(out.at(x, y), 0);
      }
    }
  }
  EXPECT_EQ(content, 2500);
  EXPECT_EQ(white, 25 * 50);
}

TEST(Warp, RoundTripOnCheckerboard) {
  ImageBuffer img(200, 200, 1);
  for (int y = 0; y < 200; ++y)
    for (int x = 0; x < 200; ++x) img.at(x, y) = ((x / 25 + y / 25) % 2) ? 200 : 50;
  const Quad src{PixelPoint(0, 0), PixelPoint(199, 0), PixelPoint(199, 199), PixelPoint(0, 199)};
  const Quad dst{PixelPoint(10, 5), PixelPoint(190, 15), PixelPoint(195, 190), PixelPoint(5, 185)};
  const Homography h = compute_homography(src, dst);
  const ImageBuffer back = warp_image(warp_image(img, h), h.inverse());
  // Away from checker edges the interpolation loss is tiny.
  int checked = 0;
  for (int y = 30; y < 170; ++y) {
    for (int x = 30; x < 170; ++x) {
      if (x % 25 < 3 || x % 25 > 22 || y % 25 < 3 || y % 25 > 22) continue;
      ASSERT_NEAR(back.at(x, y), img.at(x, y), 2) << x << "," << y;
      ++checked;
    }
  }
  EXPECT_GT(checked, 5000);
}

}  // namespace
}  // namespace roadsentry
