#include "roadsentry/pipeline.hpp"

#include "roadsentry/error.hpp"
#include "roadsentry/image_io.hpp"
#include "roadsentry/log.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roadsentry {

using nlohmann::ordered_json;

void validate(const PipelineConfig& cfg) {
  validate(cfg.roi);
  validate(cfg.headway);
  validate(cfg.dims);
  validate(cfg.lane.camera);
  validate(cfg.lane.thresholds);
  validate(cfg.lane.windows);
  if (!(cfg.filter.min_conf >= 0.0 && cfg.filter.min_conf <= 1.0)) {
    throw std::invalid_argument("min_conf must lie in [0, 1]");
  }
  if (const auto* p = std::get_if<PowerLawModel>(&cfg.depth_model); p && !(p->a > 0.0 && p->b < 0.0)) {
    throw std::invalid_argument("power-law depth model needs a > 0 and b < 0");
  }
  if (const auto* q = std::get_if<QuadraticModel>(&cfg.depth_model);
      q && !(std::isfinite(q->c2) && std::isfinite(q->c1) && std::isfinite(q->c0))) {
    throw std::invalid_argument("quadratic depth model coefficients must be finite");
  }
}

const char* to_string(BoxColor c) noexcept {
  switch (c) {
    case BoxColor::Red: return "red";
    case BoxColor::Blue: return "blue";
    case BoxColor::None: break;
  }
  return "none";
}

BoxColor ThreatAssessment::color() const noexcept {
  if (!in_roi || !verdict) return BoxColor::None;
  return *verdict == Verdict::Danger ? BoxColor::Red : BoxColor::Blue;
}

FrameReport assess_frame(const FrameDetections& frame, double speed_mps, const PipelineConfig& cfg,
                         const Polygon& roi, double horizon_y) {
  FrameReport report;
  report.frame_index = frame.frame_index;
  for (std::size_t i = 0; i < frame.detections.size(); ++i) {
    const Detection& det = frame.detections[i];
    if (det.confidence < cfg.filter.min_conf || !cfg.filter.allowed.contains(det.class_label)) continue;

    ThreatAssessment a;
    a.detection_index = i;
    a.center = bbox_center(det.box);
    a.area_px2 = bbox_area(det.box);
    a.in_roi = is_threat_candidate(det.box, roi, horizon_y);
    if (a.in_roi) {
      try {
        const double d = predict_distance(cfg.depth_model, a.area_px2);
        const HeadwayResult h = classify_headway(d, speed_mps, cfg.headway);
        a.distance_m = d;
        a.headway_s = h.headway_s;
        a.verdict = h.verdict;
      } catch (const NotPhysical&) {
        // Out-of-domain depth is treated as the closest possible obstacle.
        const HeadwayResult h = classify_headway(kMinPhysicalDistance, speed_mps, cfg.headway);
        a.distance_m = kMinPhysicalDistance;
        a.headway_s = h.headway_s;
        a.verdict = Verdict::Danger;
        a.depth_clamped = true;
      }
      if (*a.verdict == Verdict::Danger) report.frame_verdict = Verdict::Danger;
    }
    report.assessments.push_back(std::move(a));
  }
  return report;
}

SequenceProcessor::SequenceProcessor(PipelineConfig cfg, FrameProvider frames)
    : cfg_((validate(cfg), std::move(cfg))),
      frames_(std::move(frames)),
      fixed_roi_(build_fixed_roi(cfg_.roi, cfg_.dims)),
      horizon_y_(horizon_row(cfg_.roi, cfg_.dims)),
      tracker_(cfg_.lane.windows) {}

FrameOutcome SequenceProcessor::process(const FrameDetections& frame, double speed_mps) {
  if (cfg_.roi_source == RoiSource::Lane && frames_) {
    std::optional<ImageBuffer> image = frames_(frame.frame_index);
    if (image && image->dims().width == cfg_.dims.width && image->dims().height == cfg_.dims.height) {
      try {
        LaneDetection lane = detect_lane(to_rgb(*image), cfg_.lane, horizon_y_, &tracker_);
        FrameReport report = assess_frame(frame, speed_mps, cfg_, lane.polygon, horizon_y_);
        report.roi_used = RoiSource::Lane;
        return {std::move(report), std::move(lane.polygon)};
      } catch (const ProcessingError&) {
        tracker_.reset();
      }
    } else if (image) {
      log_warning(fmt::format("frame {} is {}x{}, expected {}x{}; using the fixed ROI", frame.frame_index,
                              image->width(), image->height(), cfg_.dims.width, cfg_.dims.height));
    }
  }
  return {assess_frame(frame, speed_mps, cfg_, fixed_roi_, horizon_y_), fixed_roi_};
}

std::vector<FrameDetections> fill_frame_gaps(std::span<const FrameDetections> frames) {
  std::vector<FrameDetections> out;
  if (frames.empty()) return out;
  out.reserve(static_cast<std::size_t>(frames.back().frame_index) + 1);
  long next = 0;
  for (const auto& f : frames) {
    if (f.frame_index < next) throw std::invalid_argument("frames must be ordered by strictly increasing index");
    for (; next < f.frame_index; ++next) out.push_back({next, {}});
    out.push_back(f);
    next = f.frame_index + 1;
  }
  return out;
}

std::vector<FrameReport> run_sequence(std::span<const FrameDetections> frames, const SpeedTrack& speeds,
                                      const PipelineConfig& cfg, FrameProvider provider) {
  SequenceProcessor proc(cfg, std::move(provider));
  std::vector<FrameReport> reports;
  for (const auto& f : fill_frame_gaps(frames)) reports.push_back(proc.process(f, speeds.at(f.frame_index)).report);
  return reports;
}

std::vector<FrameReport> run_sequence(std::istream& stream, const SpeedTrack& speeds, const PipelineConfig& cfg,
                                      FrameProvider provider) {
  std::vector<FrameDetections> frames;
  try {
    frames = parse_detection_stream(stream);
  } catch (const MalformedRecord& e) {
    throw StreamError(fmt::format("detection stream line {}: {}", e.line(), e.what()));
  } catch (const NonMonotonicFrame& e) {
    throw StreamError(fmt::format("detection stream line {}: {}", e.line(), e.what()));
  }
  return run_sequence(frames, speeds, cfg, std::move(provider));
}

std::string report_to_json(const FrameReport& report) {
  ordered_json assessments = ordered_json::array();
  for (const auto& a : report.assessments) {
    ordered_json j;
    j["index"] = a.detection_index;
    j["center"] = {a.center.x(), a.center.y()};
    j["in_roi"] = a.in_roi;
    j["area"] = a.area_px2;
    if (a.in_roi) {
      j["distance"] = *a.distance_m;
      if (a.headway_s->is_unbounded()) {
        j["headway"] = "unbounded";
      } else {
        j["headway"] = a.headway_s->value();
      }
      j["verdict"] = to_string(*a.verdict);
      if (a.depth_clamped) j["depth_clamped"] = true;
    }
    j["color"] = to_string(a.color());
    assessments.push_back(std::move(j));
  }
  ordered_json j;
  j["frame"] = report.frame_index;
  j["verdict"] = to_string(report.frame_verdict);
  j["roi"] = report.roi_used == RoiSource::Lane ? "lane" : "fixed";
  j["assessments"] = std::move(assessments);
  return j.dump();
}

void write_reports_jsonl(std::ostream& out, std::span<const FrameReport> reports) {
  for (const auto& r : reports) out << report_to_json(r) << '\n';
}

ImageBuffer annotate_frame(const ImageBuffer& frame, const FrameDetections& detections, const FrameReport& report,
                           const Polygon& roi) {
  ImageBuffer out = to_rgb(frame);
  draw_polyline(out, roi.vertices(), true, kGreen, 1);
  for (const auto& a : report.assessments) {
    const BoxColor color = a.color();
    if (color == BoxColor::None) continue;
    const BBox& b = detections.detections.at(a.detection_index).box;
    draw_rect(out, b.x, b.y, b.w, b.h, color == BoxColor::Red ? kRed : kBlue, 3);
  }
  return out;
}

}  // namespace roadsentry
