#include "roadsentry/lane_model.hpp"

#include "roadsentry/error.hpp"
#include "roadsentry/least_squares.hpp"
#include "roadsentry/log.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

namespace roadsentry {

namespace {

constexpr int kPolygonSamples = 16;
constexpr std::size_t kMinFitPixels = 6;

struct WindowSearch {
  std::vector<PixelPoint> left;
  std::vector<PixelPoint> right;
};

// Appends mask pixels in rows [y_lo, y_hi) and columns [x_lo, x_hi); returns the count.
std::size_t collect(const ImageBuffer& mask, int y_lo, int y_hi, double x_lo, double x_hi,
                    std::vector<PixelPoint>& out) {
  const int c0 = std::max(0, static_cast<int>(std::ceil(x_lo)));
  const int c1 = std::min(mask.width(), static_cast<int>(std::ceil(x_hi)));
  std::size_t found = 0;
  for (int y = y_lo; y < y_hi; ++y) {
    for (int x = c0; x < c1; ++x) {
      if (mask.at(x, y) != 0) {
        out.emplace_back(x, y);
        ++found;
      }
    }
  }
  return found;
}

double mean_x(std::span<const PixelPoint> pts) {
  double sum = 0.0;
  for (const auto& p : pts) sum += p.x();
  return sum / static_cast<double>(pts.size());
}

void require_mask(const ImageBuffer& mask) {
  if (mask.channels() != 1) throw std::invalid_argument("lane search needs a single-channel mask");
}

void require_ordered(const LaneFit& fit, int height) {
  const double y = height - 1.0;
  if (!(fit.right.x_at(y) > fit.left.x_at(y))) {
    throw SelfIntersecting("right lane fit is not to the right of the left fit at the bottom row");
  }
}

}  // namespace

void validate(const SlidingWindowParams& p) {
  if (p.n_windows < 1 || p.margin < 1 || p.min_pixels < 1) {
    throw std::invalid_argument("sliding-window parameters must all be at least 1");
  }
}

BasePositions base_positions(const ImageBuffer& mask) {
  require_mask(mask);
  const int w = mask.width();
  std::vector<long> hist(w, 0);
  for (int y = mask.height() / 2; y < mask.height(); ++y) {
    for (int x = 0; x < w; ++x) hist[x] += mask.at(x, y) != 0;
  }
  const int mid = w / 2;
  // max_element returns the first maximum, which is the lower column on ties.
  const auto left = std::max_element(hist.begin(), hist.begin() + mid);
  const auto right = std::max_element(hist.begin() + mid, hist.end());
  if (left == hist.begin() + mid || *left == 0) throw MissingLane(LaneSide::Left);
  if (right == hist.end() || *right == 0) throw MissingLane(LaneSide::Right);
  return {static_cast<int>(left - hist.begin()), static_cast<int>(right - hist.begin())};
}

LanePolynomial fit_lane_polynomial(std::span<const PixelPoint> pts, LaneSide side) {
  if (pts.size() < kMinFitPixels) throw InsufficientPixels(side, pts.size());
  std::set<double> rows;
  for (const auto& p : pts) {
    rows.insert(p.y());
    if (rows.size() >= 3) break;
  }
  if (rows.size() < 3) throw InsufficientPixels(side, pts.size());

  Eigen::VectorXd ys(pts.size());
  Eigen::VectorXd xs(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ys(i) = pts[i].y();
    xs(i) = pts[i].x();
  }
  const auto ls = fit_quadratic_ls(ys, xs);
  if (!ls) throw InsufficientPixels(side, pts.size());
  if (ls->condition > kConditionWarningThreshold) {
    log_warning(fmt::format("{} lane fit is ill-conditioned (condition ~{:.3g})", to_string(side), ls->condition));
  }
  return {ls->coeffs(0), ls->coeffs(1), ls->coeffs(2)};
}

LaneFit sliding_window_fit(const ImageBuffer& mask, const SlidingWindowParams& params) {
  validate(params);
  const BasePositions base = base_positions(mask);
  const int h = mask.height();
  const int window_h = std::max(1, h / params.n_windows);

  double cur_left = base.left_x;
  double cur_right = base.right_x;
  WindowSearch found;
  for (int i = 0; i < params.n_windows; ++i) {
    const int y_hi = h - i * window_h;
    const int y_lo = (i == params.n_windows - 1) ? 0 : std::max(0, h - (i + 1) * window_h);
    if (y_hi <= 0) break;

    const std::size_t l_start = found.left.size();
    const std::size_t nl = collect(mask, y_lo, y_hi, cur_left - params.margin, cur_left + params.margin, found.left);
    if (nl >= static_cast<std::size_t>(params.min_pixels)) {
      cur_left = mean_x(std::span(found.left).subspan(l_start));
    }
    const std::size_t r_start = found.right.size();
    const std::size_t nr =
        collect(mask, y_lo, y_hi, cur_right - params.margin, cur_right + params.margin, found.right);
    if (nr >= static_cast<std::size_t>(params.min_pixels)) {
      cur_right = mean_x(std::span(found.right).subspan(r_start));
    }
  }
  LaneFit fit{fit_lane_polynomial(found.left, LaneSide::Left), fit_lane_polynomial(found.right, LaneSide::Right)};
  require_ordered(fit, h);
  return fit;
}

Extent curvature_radius(const LanePolynomial& p, double y_eval, const MetricScale& scale) {
  if (!(scale.xm_per_px > 0.0 && scale.ym_per_px > 0.0)) throw std::invalid_argument("metric scales must be positive");
  if (p.a == 0.0) return Extent::unbounded();
  const double a = p.a * scale.xm_per_px / (scale.ym_per_px * scale.ym_per_px);
  const double b = p.b * scale.xm_per_px / scale.ym_per_px;
  const double y = y_eval * scale.ym_per_px;
  const double slope = 2.0 * a * y + b;
  return Extent(std::pow(1.0 + slope * slope, 1.5) / std::abs(2.0 * a));
}

double vehicle_offset(const LaneFit& fit, const FrameDims& dims, double xm_per_px) {
  const double y = dims.height - 1.0;
  const double lane_center = (fit.left.x_at(y) + fit.right.x_at(y)) / 2.0;
  return (dims.width / 2.0 - lane_center) * xm_per_px;
}

Polygon lane_polygon(const LaneFit& fit, const FrameDims& dims, double horizon_y, const Homography& to_birdseye) {
  validate(dims);
  if (!(horizon_y >= 0.0 && horizon_y < dims.height)) throw std::invalid_argument("horizon row outside the frame");

  const double bottom = dims.height - 1.0;
  std::vector<double> rows(kPolygonSamples);
  for (int i = 0; i < kPolygonSamples; ++i) {
    rows[i] = horizon_y + (bottom - horizon_y) * i / (kPolygonSamples - 1);
  }
  for (double y : rows) {
    if (fit.left.x_at(y) >= fit.right.x_at(y)) {
      throw SelfIntersecting(fmt::format("lane fits cross at row {}", y));
    }
  }

  // Right side bottom to top, then left side top to bottom.
  std::vector<PixelPoint> pts;
  pts.reserve(2 * kPolygonSamples);
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
    pts.push_back(to_birdseye.apply_inverse(PixelPoint(fit.right.x_at(*it), *it)));
  }
  for (double y : rows) pts.push_back(to_birdseye.apply_inverse(PixelPoint(fit.left.x_at(y), y)));
  try {
    return Polygon(std::move(pts));
  } catch (const std::invalid_argument& e) {
    throw SelfIntersecting(fmt::format("lane polygon is degenerate: {}", e.what()));
  }
}

LaneResult summarize_lanes(const LaneFit& fit, const FrameDims& dims, const MetricScale& scale) {
  const double y_eval = dims.height - 1.0;
  const Extent rl = curvature_radius(fit.left, y_eval, scale);
  const Extent rr = curvature_radius(fit.right, y_eval, scale);
  // Average curvature (1/R), so a straight side contributes zero.
  const double k = ((rl.is_unbounded() ? 0.0 : 1.0 / rl.value()) + (rr.is_unbounded() ? 0.0 : 1.0 / rr.value())) / 2.0;
  LaneResult r;
  r.left = fit.left;
  r.right = fit.right;
  r.curvature_radius_m = k > 0.0 ? Extent(1.0 / k) : Extent::unbounded();
  r.vehicle_offset_m = vehicle_offset(fit, dims, scale.xm_per_px);
  return r;
}

LaneTracker::LaneTracker(SlidingWindowParams params) : params_(params) { validate(params_); }

LaneFit LaneTracker::fit(const ImageBuffer& mask) {
  require_mask(mask);
  if (previous_) {
    std::vector<PixelPoint> left;
    std::vector<PixelPoint> right;
    for (int y = 0; y < mask.height(); ++y) {
      const double xl = previous_->left.x_at(y);
      const double xr = previous_->right.x_at(y);
      collect(mask, y, y + 1, xl - params_.margin, xl + params_.margin, left);
      collect(mask, y, y + 1, xr - params_.margin, xr + params_.margin, right);
    }
    const auto enough = static_cast<std::size_t>(params_.min_pixels);
    if (left.size() >= enough && right.size() >= enough) {
      try {
        LaneFit fit{fit_lane_polynomial(left, LaneSide::Left), fit_lane_polynomial(right, LaneSide::Right)};
        require_ordered(fit, mask.height());
        previous_ = fit;
        return fit;
      } catch (const ProcessingError&) {
        // fall through to the full search
      }
    }
  }
  previous_.reset();
  LaneFit fit = sliding_window_fit(mask, params_);
  previous_ = fit;
  return fit;
}

Homography birdseye_homography(const LaneChainConfig& cfg, const FrameDims& dims) {
  Quad src;
  Quad dst;
  const Eigen::Vector2d size(dims.width, dims.height);
  for (int i = 0; i < 4; ++i) {
    src[i] = cfg.src_frac[i].cwiseProduct(size);
    dst[i] = cfg.dst_frac[i].cwiseProduct(size);
  }
  return compute_homography(src, dst);
}

LaneDetection detect_lane(const ImageBuffer& rgb_frame, const LaneChainConfig& cfg, double horizon_y,
                          LaneTracker* tracker) {
  const FrameDims dims = rgb_frame.dims();
  const ImageBuffer undistorted = undistort_image(rgb_frame, cfg.camera);
  ImageBuffer mask = threshold_lane_pixels(undistorted, cfg.thresholds);
  const Homography to_birdseye = birdseye_homography(cfg, dims);
  ImageBuffer warped = warp_image(mask, to_birdseye);

  const LaneFit fit = tracker ? tracker->fit(warped) : sliding_window_fit(warped, cfg.windows);
  const Polygon full = lane_polygon(fit, dims, 0.0, to_birdseye);
  auto clipped = clip_below(full, horizon_y);
  if (!clipped) throw ProcessingError("lane polygon lies entirely above the horizon");
  return {summarize_lanes(fit, dims, cfg.scale), std::move(*clipped), std::move(mask), std::move(warped)};
}

}  // namespace roadsentry
