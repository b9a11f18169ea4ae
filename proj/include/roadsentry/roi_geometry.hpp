#pragma once

#include "roadsentry/core.hpp"
#include "roadsentry/detection_io.hpp"

#include <optional>
#include <span>
#include <vector>

namespace roadsentry {

/// Fixed trapezoidal danger region, all fractions of the frame size.
/// The top edge lies on the horizon line, centred on the frame.
struct RoiSpec {
  double left_base_frac = 0.15;
  double right_base_frac = 0.85;
  double horizon_frac = 0.45;  // upper 45% of the frame is ignored
  double apex_half_width_frac = 0.05;
};

void validate(const RoiSpec& spec);

/// Named presets: type 1 (0.1w..0.9w), type 2 (0.15w..0.85w), type 3 (0.2w..0.8w).
/// Throws std::invalid_argument for any other type.
RoiSpec roi_preset(int type);

/// Simple polygon with positive area. Vertices are stored counterclockwise as
/// seen on screen (y down), i.e. with a negative shoelace sum; the constructor
/// reverses clockwise input. Throws std::invalid_argument for fewer than three
/// vertices, non-finite coordinates, zero area or self-intersection.
class Polygon {
 public:
  explicit Polygon(std::vector<PixelPoint> vertices);

  std::span<const PixelPoint> vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }
  const PixelPoint& operator[](std::size_t i) const { return vertices_[i]; }

  double area() const noexcept;

 private:
  std::vector<PixelPoint> vertices_;
};

/// Signed shoelace sum / 2 in pixel coordinates.
double signed_area(std::span<const PixelPoint> pts) noexcept;

/// True when no two non-adjacent edges touch.
bool is_simple(std::span<const PixelPoint> pts) noexcept;

double horizon_row(const RoiSpec& spec, const FrameDims& dims) noexcept;

Polygon build_fixed_roi(const RoiSpec& spec, const FrameDims& dims);

/// Even-odd ray casting; points on the boundary count as inside.
bool point_in_polygon(const PixelPoint& p, const Polygon& poly) noexcept;

/// Box centre strictly below the horizon row and inside the polygon.
bool is_threat_candidate(const BBox& box, const Polygon& poly, double horizon_y) noexcept;

/// Part of the polygon with y >= y_min (Sutherland-Hodgman against one
/// half-plane). Returns nullopt when nothing with positive area remains.
std::optional<Polygon> clip_below(const Polygon& poly, double y_min);

}  // namespace roadsentry
