#pragma once

#include "roadsentry/depth_model.hpp"
#include "roadsentry/detection_io.hpp"
#include "roadsentry/lane_model.hpp"
#include "roadsentry/roi_geometry.hpp"
#include "roadsentry/safety_rule.hpp"
#include "roadsentry/vision_prep.hpp"

#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace roadsentry {

enum class RoiSource { Fixed, Lane };

struct DetectionFilter {
  double min_conf = kDefaultMinConfidence;
  ClassSet allowed = default_allowed_classes();
};

struct PipelineConfig {
  RoiSource roi_source = RoiSource::Fixed;
  /// The fixed ROI, and the fallback whenever lane detection fails.
  RoiSpec roi = roi_preset(2);
  DepthModel depth_model = kReferencePowerLaw;
  HeadwayConfig headway;
  DetectionFilter filter;
  LaneChainConfig lane;
  FrameDims dims{1280, 720};
};

void validate(const PipelineConfig& cfg);

enum class BoxColor { None, Red, Blue };

const char* to_string(BoxColor c) noexcept;

struct ThreatAssessment {
  std::size_t detection_index;  // position in the unfiltered frame
  PixelPoint center;
  bool in_roi = false;
  double area_px2 = 0.0;
  // Present iff in_roi.
  std::optional<double> distance_m;
  std::optional<Extent> headway_s;
  std::optional<Verdict> verdict;
  /// The depth model left its physical domain; distance holds the 0.1 m floor.
  bool depth_clamped = false;

  BoxColor color() const noexcept;
};

struct FrameReport {
  long frame_index = 0;
  std::vector<ThreatAssessment> assessments;
  Verdict frame_verdict = Verdict::Safe;
  RoiSource roi_used = RoiSource::Fixed;
};

/// Filters, locates, ranges and classifies every detection of one frame.
FrameReport assess_frame(const FrameDetections& frame, double speed_mps, const PipelineConfig& cfg,
                         const Polygon& roi, double horizon_y);

/// Supplies the camera image of a frame, if one exists (lane mode only).
using FrameProvider = std::function<std::optional<ImageBuffer>(long frame_index)>;

struct FrameOutcome {
  FrameReport report;
  Polygon roi;
};

/// One video's sequential processing context. Owns the lane tracker state.
class SequenceProcessor {
 public:
  SequenceProcessor(PipelineConfig cfg, FrameProvider frames = {});

  FrameOutcome process(const FrameDetections& frame, double speed_mps);

  const Polygon& fixed_roi() const noexcept { return fixed_roi_; }
  double horizon_y() const noexcept { return horizon_y_; }

 private:
  PipelineConfig cfg_;
  FrameProvider frames_;
  Polygon fixed_roi_;
  double horizon_y_;
  LaneTracker tracker_;
};

/// Processes frames 0..last in order; frames absent from the stream are
/// processed with no detections.
std::vector<FrameReport> run_sequence(std::span<const FrameDetections> frames, const SpeedTrack& speeds,
                                      const PipelineConfig& cfg, FrameProvider provider = {});

/// Parses the stream first; detection-io failures are rethrown as StreamError.
std::vector<FrameReport> run_sequence(std::istream& stream, const SpeedTrack& speeds, const PipelineConfig& cfg,
                                      FrameProvider provider = {});

/// Frames absent from `frames` filled in as empty, from 0 through the last index.
std::vector<FrameDetections> fill_frame_gaps(std::span<const FrameDetections> frames);

std::string report_to_json(const FrameReport& report);
void write_reports_jsonl(std::ostream& out, std::span<const FrameReport> reports);

/// Draws in-ROI boxes red (danger) or blue (safe) and the ROI outline in green.
ImageBuffer annotate_frame(const ImageBuffer& frame, const FrameDetections& detections, const FrameReport& report,
                           const Polygon& roi);

}  // namespace roadsentry
