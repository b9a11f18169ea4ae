#include "roadsentry/roi_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace roadsentry {

namespace {

double cross(const PixelPoint& a, const PixelPoint& b) noexcept { return a.x() * b.y() - a.y() * b.x(); }

int orientation(const PixelPoint& a, const PixelPoint& b, const PixelPoint& c) noexcept {
  const double v = cross(b - a, c - a);
  return (v > 0) - (v < 0);
}

bool on_segment_exact(const PixelPoint& a, const PixelPoint& b, const PixelPoint& p) noexcept {
  return p.x() >= std::min(a.x(), b.x()) && p.x() <= std::max(a.x(), b.x()) && p.y() >= std::min(a.y(), b.y()) &&
         p.y() <= std::max(a.y(), b.y());
}

bool segments_touch(const PixelPoint& a, const PixelPoint& b, const PixelPoint& c, const PixelPoint& d) noexcept {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment_exact(a, b, c)) return true;
  if (o2 == 0 && on_segment_exact(a, b, d)) return true;
  if (o3 == 0 && on_segment_exact(c, d, a)) return true;
  if (o4 == 0 && on_segment_exact(c, d, b)) return true;
  return false;
}

// Distance-based boundary test with a tolerance relative to coordinate size.
bool on_boundary_segment(const PixelPoint& a, const PixelPoint& b, const PixelPoint& p) noexcept {
  const double scale = std::max({1.0, std::abs(a.x()), std::abs(a.y()), std::abs(b.x()), std::abs(b.y())});
  const double tol = 1e-9 * scale;
  const PixelPoint ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm() <= tol;
}

}  // namespace

void validate(const FrameDims& dims) {
  if (dims.width < 2 || dims.height < 2) throw std::invalid_argument("frame dimensions must be at least 2x2");
}

void validate(const RoiSpec& s) {
  if (!(s.left_base_frac >= 0.0 && s.left_base_frac < s.right_base_frac && s.right_base_frac <= 1.0)) {
    throw std::invalid_argument("ROI base fractions must satisfy 0 <= left < right <= 1");
  }
  if (!(s.horizon_frac > 0.0 && s.horizon_frac < 1.0)) throw std::invalid_argument("horizon fraction must lie in (0, 1)");
  if (!(s.apex_half_width_frac > 0.0 && s.apex_half_width_frac < 0.5)) {
    throw std::invalid_argument("apex half-width fraction must lie in (0, 0.5)");
  }
}

RoiSpec roi_preset(int type) {
  switch (type) {
    case 1: return {0.10, 0.90};
    case 2: return {0.15, 0.85};
    case 3: return {0.20, 0.80};
    default: throw std::invalid_argument("ROI type must be 1, 2 or 3");
  }
}

double signed_area(std::span<const PixelPoint> pts) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0, n = pts.size(); i < n; ++i) sum += cross(pts[i], pts[(i + 1) % n]);
  return sum / 2.0;
}

bool is_simple(std::span<const PixelPoint> pts) noexcept {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const PixelPoint& a = pts[i];
    const PixelPoint& b = pts[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_touch(a, b, pts[j], pts[(j + 1) % n])) return false;
    }
  }
  return true;
}

Polygon::Polygon(std::vector<PixelPoint> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) throw std::invalid_argument("a polygon needs at least three vertices");
  for (const auto& v : vertices_) {
    if (!v.allFinite()) throw std::invalid_argument("polygon vertices must be finite");
  }
  const double a = signed_area(vertices_);
  if (a == 0.0) throw std::invalid_argument("polygon has zero area");
  if (!is_simple(vertices_)) throw std::invalid_argument("polygon is self-intersecting");
  if (a > 0.0) std::reverse(vertices_.begin(), vertices_.end());
}

double Polygon::area() const noexcept { return std::abs(signed_area(vertices_)); }

double horizon_row(const RoiSpec& spec, const FrameDims& dims) noexcept { return spec.horizon_frac * dims.height; }

Polygon build_fixed_roi(const RoiSpec& spec, const FrameDims& dims) {
  validate(spec);
  validate(dims);
  const double w = dims.width;
  const double base_y = dims.height - 1.0;
  const double top_y = horizon_row(spec, dims);
  const double half = spec.apex_half_width_frac * w;
  return Polygon({PixelPoint(spec.left_base_frac * w, base_y), PixelPoint(spec.right_base_frac * w, base_y),
                  PixelPoint(w / 2.0 + half, top_y), PixelPoint(w / 2.0 - half, top_y)});
}

bool point_in_polygon(const PixelPoint& p, const Polygon& poly) noexcept {
  const auto v = poly.vertices();
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (on_boundary_segment(v[i], v[(i + 1) % n], p)) return true;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const PixelPoint& a = v[i];
    const PixelPoint& b = v[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_cross = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool is_threat_candidate(const BBox& box, const Polygon& poly, double horizon_y) noexcept {
  const PixelPoint c = bbox_center(box);
  return c.y() > horizon_y && point_in_polygon(c, poly);
}

std::optional<Polygon> clip_below(const Polygon& poly, double y_min) {
  const auto v = poly.vertices();
  std::vector<PixelPoint> out;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const PixelPoint& cur = v[i];
    const PixelPoint& next = v[(i + 1) % n];
    const bool cur_in = cur.y() >= y_min;
    const bool next_in = next.y() >= y_min;
    if (cur_in) out.push_back(cur);
    if (cur_in != next_in) {
      const double t = (y_min - cur.y()) / (next.y() - cur.y());
      out.emplace_back(cur.x() + t * (next.x() - cur.x()), y_min);
    }
  }
  // Drop consecutive duplicates produced when a vertex lies on the clip line.
  out.erase(std::unique(out.begin(), out.end()), out.end());
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  if (out.size() < 3 || signed_area(out) == 0.0) return std::nullopt;
  try {
    return Polygon(std::move(out));
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

}  // namespace roadsentry
