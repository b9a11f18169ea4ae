#pragma once

#include "roadsentry/core.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace roadsentry {

/// Pinhole intrinsics plus Brown-Conrady distortion (radial k1..k3,
/// tangential p1, p2).
struct CameraIntrinsics {
  double fx = 1000.0;
  double fy = 1000.0;
  double cx = 640.0;
  double cy = 360.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;

  bool has_distortion() const noexcept { return k1 != 0 || k2 != 0 || k3 != 0 || p1 != 0 || p2 != 0; }
};

void validate(const CameraIntrinsics& intr);

/// 8-bit row-major image, 1 (gray/mask) or 3 (RGB) channels.
class ImageBuffer {
 public:
  ImageBuffer(int width, int height, int channels, std::uint8_t fill = 0);
  ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  FrameDims dims() const noexcept { return {width_, height_}; }

  std::uint8_t& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_;
  int height_;
  int channels_;
  std::vector<std::uint8_t> data_;
};

/// Closed interval [lo, hi].
struct Range {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

/// HLS lane-paint thresholds. Lightness gates shadows; a pixel that passes it
/// is accepted when its saturation or hue falls in range, or when it is bright
/// enough to be white paint.
struct ColorThresholds {
  Range hue_deg{35.0, 65.0};
  Range saturation{0.35, 1.0};
  double lightness_min = 0.45;
  double white_lightness_min = 0.85;
};

void validate(const ColorThresholds& t);

struct Hls {
  double h;  // degrees in [0, 360)
  double l;  // [0, 1]
  double s;  // [0, 1]
};

Hls rgb_to_hls(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;

/// Maps an ideal (undistorted) pixel to where the lens images it.
PixelPoint distort_point(const PixelPoint& ideal, const CameraIntrinsics& intr) noexcept;

/// Inverse of distort_point by damped fixed-point iteration (at most 50 steps,
/// converged when the forward map reproduces the input within 1e-6 px).
/// Throws NonConvergence otherwise.
PixelPoint undistort_point(const PixelPoint& distorted, const CameraIntrinsics& intr);

/// Resamples the image onto the ideal pinhole grid: output pixel p is read at
/// distort_point(p) with bilinear interpolation, black outside the source.
ImageBuffer undistort_image(const ImageBuffer& img, const CameraIntrinsics& intr);

/// Binary mask (values 0/1) of lane-paint candidates.
ImageBuffer threshold_lane_pixels(const ImageBuffer& rgb, const ColorThresholds& t);

/// Planar projective map with a cached inverse.
class Homography {
 public:
  /// Throws DegenerateQuad if `h` is singular.
  explicit Homography(const Eigen::Matrix3d& h);

  static Homography identity() { return Homography(Eigen::Matrix3d::Identity()); }

  const Eigen::Matrix3d& matrix() const noexcept { return h_; }
  const Eigen::Matrix3d& inverse_matrix() const noexcept { return h_inv_; }
  Homography inverse() const { return Homography(h_inv_); }

  PixelPoint apply(const PixelPoint& p) const noexcept;
  PixelPoint apply_inverse(const PixelPoint& p) const noexcept;

 private:
  Eigen::Matrix3d h_;
  Eigen::Matrix3d h_inv_;
};

using Quad = std::array<PixelPoint, 4>;

/// Exact four-point homography, normalized to h33 = 1. Throws DegenerateQuad
/// when three points of either quad are collinear.
Homography compute_homography(const Quad& src, const Quad& dst);

/// Output pixel (u, v) samples the input at H^-1 (u, v, 1) with bilinear
/// interpolation, black outside. Output size defaults to the input size.
ImageBuffer warp_image(const ImageBuffer& img, const Homography& h,
                       std::optional<FrameDims> out_dims = std::nullopt);

/// Bilinear sample of channel `c`; nullopt outside [0, w-1] x [0, h-1].
std::optional<double> sample_bilinear(const ImageBuffer& img, double x, double y, int c) noexcept;

}  // namespace roadsentry
