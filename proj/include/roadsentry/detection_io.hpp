#pragma once

#include "roadsentry/core.hpp"

#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace roadsentry {

/// Axis-aligned box, top-left corner plus size, in undistorted-frame pixels.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Throws std::invalid_argument unless w, h > 0 and all fields finite.
void validate(const BBox& box);

inline double bbox_area(const BBox& box) noexcept { return box.w * box.h; }
inline PixelPoint bbox_center(const BBox& box) noexcept { return {box.x + box.w / 2.0, box.y + box.h / 2.0}; }

struct Detection {
  BBox box;
  std::string class_label;
  double confidence = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct FrameDetections {
  long frame_index = 0;
  std::vector<Detection> detections;

  friend bool operator==(const FrameDetections&, const FrameDetections&) = default;
};

/// Parses the JSON Lines detection stream:
///   {"frame": <int>, "detections": [{"bbox": [x, y, w, h], "class": "<label>", "conf": <float>}]}
/// Blank lines are skipped. Frame indices must strictly increase; missing
/// frames mean no detections. Throws MalformedRecord / NonMonotonicFrame
/// with 1-based line numbers.
std::vector<FrameDetections> parse_detection_stream(std::istream& in);

/// Inverse of parse_detection_stream, one line per frame.
void write_detection_stream(std::ostream& out, const std::vector<FrameDetections>& frames);

using ClassSet = std::set<std::string>;

const ClassSet& default_allowed_classes();
inline constexpr double kDefaultMinConfidence = 0.5;

/// Keeps detections with confidence >= min_conf and an allowed class, in order.
FrameDetections filter_detections(const FrameDetections& frame, double min_conf, const ClassSet& allowed);

}  // namespace roadsentry
