#pragma once

#include "roadsentry/core.hpp"
#include "roadsentry/error.hpp"
#include "roadsentry/roi_geometry.hpp"
#include "roadsentry/vision_prep.hpp"

#include <optional>
#include <span>

namespace roadsentry {

/// x = a y^2 + b y + c, y in image rows of the bird's-eye mask.
struct LanePolynomial {
  double a = 0.0;  // px^-1
  double b = 0.0;
  double c = 0.0;  // px

  double x_at(double y) const noexcept { return (a * y + b) * y + c; }
};

struct SlidingWindowParams {
  int n_windows = 9;
  int margin = 100;
  int min_pixels = 50;
};

void validate(const SlidingWindowParams& p);

/// Metres per pixel in the bird's-eye view.
struct MetricScale {
  double xm_per_px = 3.7 / 700.0;
  double ym_per_px = 30.0 / 720.0;
};

struct LaneFit {
  LanePolynomial left;
  LanePolynomial right;
};

struct LaneResult {
  LanePolynomial left;
  LanePolynomial right;
  Extent curvature_radius_m = Extent::unbounded();
  double vehicle_offset_m = 0.0;  // positive: camera right of lane centre
};

struct BasePositions {
  int left_x;
  int right_x;
};

/// Column histogram of the bottom half; argmax of each half, ties to the
/// lower column. Throws MissingLane when a half has no pixels.
BasePositions base_positions(const ImageBuffer& mask);

/// Least-squares x = a y^2 + b y + c. Throws InsufficientPixels(side) with
/// fewer than 6 points or fewer than 3 distinct rows.
LanePolynomial fit_lane_polynomial(std::span<const PixelPoint> pts, LaneSide side);

/// Full sliding-window search from the histogram bases.
LaneFit sliding_window_fit(const ImageBuffer& mask, const SlidingWindowParams& params);

/// Radius of curvature in metres at row y_eval; unbounded for a = 0.
Extent curvature_radius(const LanePolynomial& p, double y_eval, const MetricScale& scale);

/// (frame centre - lane centre at the bottom row) * xm_per_px.
double vehicle_offset(const LaneFit& fit, const FrameDims& dims, double xm_per_px);

/// Drivable-lane polygon: both fits sampled at 16 rows from horizon_y to the
/// bottom row, mapped back to the camera view by `to_birdseye`'s inverse.
/// Throws SelfIntersecting when the fits cross.
Polygon lane_polygon(const LaneFit& fit, const FrameDims& dims, double horizon_y, const Homography& to_birdseye);

/// Completes a fit with curvature (harmonic mean of both sides, evaluated at
/// the bottom row) and vehicle offset.
LaneResult summarize_lanes(const LaneFit& fit, const FrameDims& dims, const MetricScale& scale);

/// Per-sequence fit cache. With a previous fit, pixels are gathered within
/// `margin` of it; if either side finds fewer than min_pixels, it falls back
/// to the full sliding-window search.
class LaneTracker {
 public:
  explicit LaneTracker(SlidingWindowParams params = {});

  LaneFit fit(const ImageBuffer& mask);
  void reset() noexcept { previous_.reset(); }
  bool has_previous() const noexcept { return previous_.has_value(); }

 private:
  SlidingWindowParams params_;
  std::optional<LaneFit> previous_;
};

/// Everything needed to go from a camera frame to a lane polygon.
struct LaneChainConfig {
  CameraIntrinsics camera;
  ColorThresholds thresholds;
  /// Bird's-eye source/destination quads as fractions of (width, height).
  Quad src_frac{PixelPoint(0.457, 0.639), PixelPoint(0.159, 1.0), PixelPoint(0.880, 1.0), PixelPoint(0.543, 0.639)};
  Quad dst_frac{PixelPoint(0.25, 0.0), PixelPoint(0.25, 1.0), PixelPoint(0.75, 1.0), PixelPoint(0.75, 0.0)};
  SlidingWindowParams windows;
  MetricScale scale;
};

Homography birdseye_homography(const LaneChainConfig& cfg, const FrameDims& dims);

struct LaneDetection {
  LaneResult result;
  Polygon polygon;  // camera view, clipped to y >= horizon_y
  ImageBuffer mask;
  ImageBuffer warped_mask;
};

/// undistort -> threshold -> warp -> fit -> polygon -> clip at the horizon.
/// Uses `tracker` for the fit when given, else a full search. Throws the
/// lane-model errors, or ProcessingError if the clipped polygon is empty.
LaneDetection detect_lane(const ImageBuffer& rgb_frame, const LaneChainConfig& cfg, double horizon_y,
                          LaneTracker* tracker = nullptr);

}  // namespace roadsentry
