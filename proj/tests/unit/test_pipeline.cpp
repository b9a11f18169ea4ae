#include "roadsentry/error.hpp"
#include "roadsentry/eval_harness.hpp"
#include "roadsentry/pipeline.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace roadsentry {
namespace {

BBox square_box(double cx, double cy, double area) {
  const double s = std::sqrt(area);
  return {cx - s / 2, cy - s / 2, s, s};
}

FrameReport assess_one(const FrameDetections& f, double speed, const PipelineConfig& cfg = {}) {
  const Polygon roi = build_fixed_roi(cfg.roi, cfg.dims);
  return assess_frame(f, speed, cfg, roi, horizon_row(cfg.roi, cfg.dims));
}

std::string as_jsonl(std::span<const FrameReport> reports) {
  std::ostringstream out;
  write_reports_jsonl(out, reports);
  return out.str();
}

TEST(AssessFrame, CloseCarIsDanger) {
  const FrameReport r = assess_one({0, {{square_box(640, 600, 96657), "car", 0.9}}}, 10.0);
  ASSERT_EQ(r.assessments.size(), 1u);
  const ThreatAssessment& a = r.assessments[0];
  EXPECT_TRUE(a.in_roi);
  EXPECT_NEAR(*a.distance_m, 5.00, 0.05);
  EXPECT_EQ(*a.verdict, Verdict::Danger);
  EXPECT_EQ(a.color(), BoxColor::Red);
  EXPECT_EQ(r.frame_verdict, Verdict::Danger);
}

TEST(AssessFrame, FarCarIsSafe) {
  const FrameReport r = assess_one({0, {{square_box(640, 600, 12168), "car", 0.9}}}, 5.0);
  const ThreatAssessment& a = r.assessments.at(0);
  EXPECT_NEAR(*a.distance_m, 16.9, 0.1);
  EXPECT_NEAR(a.headway_s->value(), 3.38, 0.02);
  EXPECT_EQ(*a.verdict, Verdict::Safe);
  EXPECT_EQ(a.color(), BoxColor::Blue);
  EXPECT_EQ(r.frame_verdict, Verdict::Safe);
}

TEST(AssessFrame, AboveHorizonIsIgnored) {
  const FrameReport r = assess_one({0, {{square_box(640, 200, 96657), "car", 0.9}}}, 10.0);
  ASSERT_EQ(r.assessments.size(), 1u);
  EXPECT_FALSE(r.assessments[0].in_roi);
  EXPECT_FALSE(r.assessments[0].verdict.has_value());
  EXPECT_EQ(r.assessments[0].color(), BoxColor::None);
  EXPECT_EQ(r.frame_verdict, Verdict::Safe);
}

TEST(AssessFrame, DetectionsAreIndependent) {
  const Detection near{square_box(640, 600, 96657), "car", 0.9};
  const Detection far{square_box(600, 650, 5000), "truck", 0.8};
  const Detection outside{square_box(40, 700, 96657), "car", 0.9};
  const FrameReport all = assess_one({0, {far, outside, near}}, 10.0);
  const FrameReport alone = assess_one({0, {near}}, 10.0);
  ASSERT_EQ(all.assessments.size(), 3u);
  EXPECT_EQ(all.assessments[2].distance_m, alone.assessments[0].distance_m);
  EXPECT_EQ(all.assessments[2].verdict, alone.assessments[0].verdict);
  EXPECT_EQ(all.assessments[0].verdict, Verdict::Safe);
  EXPECT_FALSE(all.assessments[1].in_roi);
  EXPECT_EQ(all.frame_verdict, Verdict::Danger);
}

TEST(AssessFrame, EmptyClassSetMeansSafe) {
  PipelineConfig cfg;
  cfg.filter.allowed = {};
  const FrameReport r = assess_one({0, {{square_box(640, 600, 400000), "car", 0.99}}}, 30.0, cfg);
  EXPECT_TRUE(r.assessments.empty());
  EXPECT_EQ(r.frame_verdict, Verdict::Safe);
}

TEST(AssessFrame, QuadraticOutsideDomainClampsToDanger) {
  PipelineConfig cfg;
  cfg.depth_model = QuadraticModel{0, -1e-4, 10};
  const FrameReport r = assess_one({0, {{square_box(640, 600, 400000), "car", 0.9}}}, 0.01, cfg);
  const ThreatAssessment& a = r.assessments.at(0);
  EXPECT_TRUE(a.depth_clamped);
  EXPECT_EQ(*a.distance_m, kMinPhysicalDistance);
  EXPECT_EQ(*a.verdict, Verdict::Danger);
  EXPECT_NE(report_to_json(r).find("\"depth_clamped\":true"), std::string::npos);
}

TEST(Sequence, EmptyInputs) {
  std::istringstream none("");
  EXPECT_TRUE(run_sequence(none, SpeedTrack::constant(10), {}).empty());
  std::istringstream three(
      "{\"frame\":0,\"detections\":[]}\n{\"frame\":1,\"detections\":[]}\n{\"frame\":2,\"detections\":[]}\n");
  const auto reports = run_sequence(three, SpeedTrack::constant(10), {});
  ASSERT_EQ(reports.size(), 3u);
  for (const auto& r : reports) EXPECT_EQ(r.frame_verdict, Verdict::Safe);
  EXPECT_EQ(video_verdict(std::span<const FrameReport>(reports)).predicted, VideoLabel::NoCrash);
}

TEST(Sequence, GapsAreFilledFromFrameZero) {
  std::istringstream in("{\"frame\":2,\"detections\":[]}\n{\"frame\":5,\"detections\":[]}\n");
  const auto reports = run_sequence(in, SpeedTrack::constant(10), {});
  ASSERT_EQ(reports.size(), 6u);
  for (long i = 0; i < 6; ++i) EXPECT_EQ(reports[static_cast<std::size_t>(i)].frame_index, i);
}

TEST(Sequence, StreamErrorsAreWrapped) {
  std::istringstream bad("{\"frame\":0,\"detections\":[]}\nnot json\n");
  try {
    run_sequence(bad, SpeedTrack::constant(10), {});
    FAIL();
  } catch (const StreamError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  std::istringstream back("{\"frame\":3,\"detections\":[]}\n{\"frame\":1,\"detections\":[]}\n");
  EXPECT_THROW(run_sequence(back, SpeedTrack::constant(10), {}), StreamError);
}

TEST(Sequence, HandCheckedApproach) {
  const SyntheticScenario s = generate_synthetic_scenario({});
  const auto reports = run_sequence(s.frames, SpeedTrack::constant(20), {});
  ASSERT_EQ(reports.size(), 90u);
  EXPECT_EQ(reports[29].frame_verdict, Verdict::Safe);
  EXPECT_EQ(reports[30].frame_verdict, Verdict::Danger);
  const VideoVerdict v = video_verdict(std::span<const FrameReport>(reports));
  EXPECT_EQ(v.predicted, VideoLabel::Crash);
  EXPECT_EQ(v.first_alert_frame, 30);
}

TEST(Sequence, Deterministic) {
  const SyntheticScenario s = generate_synthetic_scenario({});
  const auto a = run_sequence(s.frames, SpeedTrack::constant(20), {});
  const auto b = run_sequence(s.frames, SpeedTrack::constant(20), {});
  EXPECT_EQ(as_jsonl(a), as_jsonl(b));
}

TEST(Sequence, LaneModeFallsBackToFixedRoi) {
  SyntheticScenarioSpec spec;
  spec.duration_s = 1.5;
  const SyntheticScenario s = generate_synthetic_scenario(spec);
  PipelineConfig lane_cfg;
  lane_cfg.roi_source = RoiSource::Lane;
  FrameProvider blank = [](long) { return std::optional<ImageBuffer>(ImageBuffer(1280, 720, 3)); };
  const auto fixed = run_sequence(s.frames, SpeedTrack::constant(20), {});
  const auto fallback = run_sequence(s.frames, SpeedTrack::constant(20), lane_cfg, blank);
  EXPECT_EQ(as_jsonl(fixed), as_jsonl(fallback));
  FrameProvider wrong_size = [](long) { return std::optional<ImageBuffer>(ImageBuffer(64, 64, 3)); };
  EXPECT_EQ(as_jsonl(fixed), as_jsonl(run_sequence(s.frames, SpeedTrack::constant(20), lane_cfg, wrong_size)));
}

TEST(Sequence, MissingSpeedPropagates) {
  const std::vector<FrameDetections> frames{{0, {}}, {1, {}}};
  EXPECT_THROW(run_sequence(frames, SpeedTrack::per_frame({{1, 10.0}}), {}), MissingSpeed);
}

TEST(Annotate, DrawsBoxColours) {
  const FrameDetections f{0, {{{600, 560, 80, 80}, "car", 0.9}}};
  const FrameReport r = assess_one(f, 100.0);
  ASSERT_EQ(r.frame_verdict, Verdict::Danger);
  const PipelineConfig cfg;
  const ImageBuffer img = annotate_frame(ImageBuffer(1280, 720, 3), f, r, build_fixed_roi(cfg.roi, cfg.dims));
  EXPECT_EQ(img.at(600, 600, 0), 255);
  EXPECT_EQ(img.at(600, 600, 2), 0);
  EXPECT_EQ(img.at(640, 600, 0), 0);
}

}  // namespace
}  // namespace roadsentry
