#include "roadsentry/vision_prep.hpp"

#include "roadsentry/error.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roadsentry {

namespace {

constexpr int kMaxUndistortIterations = 50;
constexpr double kUndistortTolerancePx = 1e-6;
// Sample coordinates this close outside the image are snapped onto the edge.
constexpr double kEdgeSnap = 1e-9;

std::uint8_t to_byte(double v) noexcept {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

Eigen::Vector2d distort_normalized(const Eigen::Vector2d& p, const CameraIntrinsics& k) noexcept {
  const double x = p.x();
  const double y = p.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (k.k1 + r2 * (k.k2 + r2 * k.k3));
  return {x * radial + 2.0 * k.p1 * x * y + k.p2 * (r2 + 2.0 * x * x),
          y * radial + k.p1 * (r2 + 2.0 * y * y) + 2.0 * k.p2 * x * y};
}

// Similarity transform taking the points to zero centroid and mean distance sqrt(2).
Eigen::Matrix3d normalizing_transform(const Quad& pts) {
  PixelPoint centroid = PixelPoint::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= 4.0;
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= 4.0;
  if (!(mean_dist > 0.0)) throw DegenerateQuad("quad points coincide");
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * centroid.x(),
       0, s, -s * centroid.y(),
       0, 0, 1;
  return t;
}

void require_no_collinear_triple(const Quad& pts, const char* which) {
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  scale = std::max(scale, 1.0);
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      for (int k = j + 1; k < 4; ++k) {
        const PixelPoint a = pts[j] - pts[i];
        const PixelPoint b = pts[k] - pts[i];
        const double cross = a.x() * b.y() - a.y() * b.x();
        if (std::abs(cross) <= 1e-12 * scale * scale) {
          throw DegenerateQuad(fmt::format("{} points {}, {}, {} are collinear", which, i, j, k));
        }
      }
    }
  }
}

}  // namespace

void validate(const CameraIntrinsics& k) {
  if (!(k.fx > 0.0) || !(k.fy > 0.0)) throw std::invalid_argument("focal lengths must be positive");
  for (double v : {k.cx, k.cy, k.k1, k.k2, k.k3, k.p1, k.p2}) {
    if (!std::isfinite(v)) throw std::invalid_argument("camera parameters must be finite");
  }
}

void validate(const ColorThresholds& t) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!(t.hue_deg.lo >= 0.0 && t.hue_deg.hi < 360.0 && t.hue_deg.lo <= t.hue_deg.hi)) {
    throw std::invalid_argument("hue range must satisfy 0 <= lo <= hi < 360");
  }
  if (!(in_unit(t.saturation.lo) && in_unit(t.saturation.hi) && t.saturation.lo <= t.saturation.hi)) {
    throw std::invalid_argument("saturation range must satisfy 0 <= lo <= hi <= 1");
  }
  if (!in_unit(t.lightness_min) || !in_unit(t.white_lightness_min)) {
    throw std::invalid_argument("lightness thresholds must lie in [0, 1]");
  }
}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 1 || height < 1) throw std::invalid_argument("image dimensions must be positive");
  if (channels != 1 && channels != 3) throw std::invalid_argument("images have 1 or 3 channels");
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> data)
    : ImageBuffer(width, height, channels) {
  if (data.size() != data_.size()) throw std::invalid_argument("pixel data does not match dimensions");
  data_ = std::move(data);
}

Hls rgb_to_hls(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) noexcept {
  const int mx = std::max({r8, g8, b8});
  const int mn = std::min({r8, g8, b8});
  const double l = (mx + mn) / 510.0;
  if (mx == mn) return {0.0, l, 0.0};

  const double d = (mx - mn) / 255.0;
  // Integer ratios keep fully saturated colours at exactly 1.
  const double s = mx + mn < 255 ? static_cast<double>(mx - mn) / (mx + mn)
                                 : static_cast<double>(mx - mn) / (510 - mx - mn);

  const double r = r8 / 255.0;
  const double g = g8 / 255.0;
  const double b = b8 / 255.0;
  double h;
  if (mx == r8) {
    h = 60.0 * std::fmod((g - b) / d, 6.0);
  } else if (mx == g8) {
    h = 60.0 * ((b - r) / d + 2.0);
  } else {
    h = 60.0 * ((r - g) / d + 4.0);
  }
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  return {h, l, s};
}

PixelPoint distort_point(const PixelPoint& ideal, const CameraIntrinsics& k) noexcept {
  const Eigen::Vector2d n((ideal.x() - k.cx) / k.fx, (ideal.y() - k.cy) / k.fy);
  const Eigen::Vector2d d = distort_normalized(n, k);
  return {d.x() * k.fx + k.cx, d.y() * k.fy + k.cy};
}

PixelPoint undistort_point(const PixelPoint& distorted, const CameraIntrinsics& k) {
  if (!distorted.allFinite()) throw std::invalid_argument("undistort_point needs a finite point");
  const Eigen::Vector2d target((distorted.x() - k.cx) / k.fx, (distorted.y() - k.cy) / k.fy);

  auto residual_px = [&](const Eigen::Vector2d& n) {
    const Eigen::Vector2d e = distort_normalized(n, k) - target;
    return std::hypot(e.x() * k.fx, e.y() * k.fy);
  };
  auto to_pixel = [&](const Eigen::Vector2d& n) { return PixelPoint(n.x() * k.fx + k.cx, n.y() * k.fy + k.cy); };

  Eigen::Vector2d n = target;
  double residual = residual_px(n);
  double damping = 1.0;
  for (int iter = 0; iter < kMaxUndistortIterations; ++iter) {
    if (residual < kUndistortTolerancePx) return to_pixel(n);

    // Fixed point of n = (target - tangential(n)) / radial(n).
    const double r2 = n.squaredNorm();
    const double radial = 1.0 + r2 * (k.k1 + r2 * (k.k2 + r2 * k.k3));
    const double tx = 2.0 * k.p1 * n.x() * n.y() + k.p2 * (r2 + 2.0 * n.x() * n.x());
    const double ty = k.p1 * (r2 + 2.0 * n.y() * n.y()) + 2.0 * k.p2 * n.x() * n.y();
    const Eigen::Vector2d next((target.x() - tx) / radial, (target.y() - ty) / radial);

    const Eigen::Vector2d candidate = n + damping * (next - n);
    const double candidate_residual = residual_px(candidate);
    if (std::isfinite(candidate_residual) && candidate_residual < residual) {
      n = candidate;
      residual = candidate_residual;
    } else {
      damping *= 0.5;
    }
  }
  if (residual < kUndistortTolerancePx) return to_pixel(n);
  throw NonConvergence(fmt::format("undistortion of ({}, {}) left a {} px residual after {} iterations",
                                   distorted.x(), distorted.y(), residual, kMaxUndistortIterations));
}

std::optional<double> sample_bilinear(const ImageBuffer& img, double x, double y, int c) noexcept {
  const double max_x = img.width() - 1;
  const double max_y = img.height() - 1;
  if (!(x >= -kEdgeSnap && x <= max_x + kEdgeSnap && y >= -kEdgeSnap && y <= max_y + kEdgeSnap)) {
    return std::nullopt;
  }
  x = std::clamp(x, 0.0, max_x);
  y = std::clamp(y, 0.0, max_y);
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double ax = x - x0;
  const double ay = y - y0;
  const double top = (1.0 - ax) * img.at(x0, y0, c) + ax * img.at(x1, y0, c);
  const double bottom = (1.0 - ax) * img.at(x0, y1, c) + ax * img.at(x1, y1, c);
  return (1.0 - ay) * top + ay * bottom;
}

ImageBuffer undistort_image(const ImageBuffer& img, const CameraIntrinsics& k) {
  validate(k);
  if (!k.has_distortion()) return img;

  ImageBuffer out(img.width(), img.height(), img.channels());
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < img.width(); ++u) {
      const PixelPoint src = distort_point(PixelPoint(u, v), k);
      for (int c = 0; c < img.channels(); ++c) {
        if (auto s = sample_bilinear(img, src.x(), src.y(), c)) out.at(u, v, c) = to_byte(*s);
      }
    }
  }
  return out;
}

ImageBuffer threshold_lane_pixels(const ImageBuffer& rgb, const ColorThresholds& t) {
  if (rgb.channels() != 3) throw std::invalid_argument("threshold_lane_pixels needs an RGB image");
  ImageBuffer mask(rgb.width(), rgb.height(), 1);
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) {
      const Hls hls = rgb_to_hls(rgb.at(x, y, 0), rgb.at(x, y, 1), rgb.at(x, y, 2));
      const bool lit = hls.l >= t.lightness_min;
      const bool paint = t.saturation.contains(hls.s) || t.hue_deg.contains(hls.h) || hls.l >= t.white_lightness_min;
      mask.at(x, y) = (lit && paint) ? 1 : 0;
    }
  }
  return mask;
}

Homography::Homography(const Eigen::Matrix3d& h) : h_(h) {
  if (!h.allFinite()) throw DegenerateQuad("homography has non-finite entries");
  Eigen::FullPivLU<Eigen::Matrix3d> lu(h);
  if (!lu.isInvertible()) throw DegenerateQuad("homography is singular");
  h_inv_ = lu.inverse();
}

PixelPoint Homography::apply(const PixelPoint& p) const noexcept {
  return (h_ * p.homogeneous()).hnormalized();
}

PixelPoint Homography::apply_inverse(const PixelPoint& p) const noexcept {
  return (h_inv_ * p.homogeneous()).hnormalized();
}

Homography compute_homography(const Quad& src, const Quad& dst) {
  require_no_collinear_triple(src, "source");
  require_no_collinear_triple(dst, "destination");

  // Solve in Hartley-normalized coordinates, then undo the normalization.
  const Eigen::Matrix3d ts = normalizing_transform(src);
  const Eigen::Matrix3d td = normalizing_transform(dst);

  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> rhs;
  for (int i = 0; i < 4; ++i) {
    const PixelPoint s = (ts * src[i].homogeneous()).hnormalized();
    const PixelPoint d = (td * dst[i].homogeneous()).hnormalized();
    a.row(2 * i) << s.x(), s.y(), 1, 0, 0, 0, -d.x() * s.x(), -d.x() * s.y();
    a.row(2 * i + 1) << 0, 0, 0, s.x(), s.y(), 1, -d.y() * s.x(), -d.y() * s.y();
    rhs(2 * i) = d.x();
    rhs(2 * i + 1) = d.y();
  }
  Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (!lu.isInvertible()) throw DegenerateQuad("point correspondences do not determine a homography");
  const Eigen::Matrix<double, 8, 1> sol = lu.solve(rhs);

  Eigen::Matrix3d hn;
  hn << sol(0), sol(1), sol(2),
        sol(3), sol(4), sol(5),
        sol(6), sol(7), 1.0;
  Eigen::Matrix3d h = td.inverse() * hn * ts;
  if (std::abs(h(2, 2)) < 1e-300) throw DegenerateQuad("homography cannot be normalized");
  h /= h(2, 2);
  return Homography(h);
}

ImageBuffer warp_image(const ImageBuffer& img, const Homography& h, std::optional<FrameDims> out_dims) {
  const FrameDims dims = out_dims.value_or(img.dims());
  ImageBuffer out(dims.width, dims.height, img.channels());
  for (int v = 0; v < dims.height; ++v) {
    for (int u = 0; u < dims.width; ++u) {
      const Eigen::Vector3d q = h.inverse_matrix() * Eigen::Vector3d(u, v, 1.0);
      if (std::abs(q.z()) < 1e-12) continue;
      const double x = q.x() / q.z();
      const double y = q.y() / q.z();
      for (int c = 0; c < img.channels(); ++c) {
        if (auto s = sample_bilinear(img, x, y, c)) out.at(u, v, c) = to_byte(*s);
      }
    }
  }
  return out;
}

}  // namespace roadsentry
