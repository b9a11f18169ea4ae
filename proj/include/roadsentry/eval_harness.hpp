#pragma once

#include "roadsentry/depth_model.hpp"
#include "roadsentry/detection_io.hpp"
#include "roadsentry/pipeline.hpp"
#include "roadsentry/safety_rule.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace roadsentry {

enum class VideoLabel { Crash, NoCrash };

const char* to_string(VideoLabel l) noexcept;
/// "crash" / "no_crash"; throws DataError otherwise.
VideoLabel parse_video_label(std::string_view text);

struct VideoVerdict {
  VideoLabel predicted = VideoLabel::NoCrash;
  std::optional<long> first_alert_frame;
};

/// Crash iff `persistence` consecutive Danger frames occur; the alert frame is
/// the first frame of the first such run. Positions are frame indices.
VideoVerdict video_verdict(std::span<const Verdict> verdicts, int persistence = 1);

/// Same over reports (frame indices taken from the reports, which must be
/// consecutive as produced by run_sequence).
VideoVerdict video_verdict(std::span<const FrameReport> reports, int persistence = 1);

struct EvalRow {
  VideoLabel predicted;
  VideoLabel truth;
  std::optional<long> first_alert_frame;
};

struct ConfusionMatrix {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;

  long total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct DelayStats {
  std::size_t count = 0;
  double average = 0.0;
  long median = 0;  // lower middle element for even counts
};

/// Mean and lower median; nullopt for an empty list.
std::optional<DelayStats> delay_statistics(std::vector<long> delays);

struct MetricsReport {
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  /// Over true positives that raised an alert.
  std::optional<DelayStats> frame_delay;
};

/// Throws EmptyEvaluation for no rows.
MetricsReport compute_metrics(std::span<const EvalRow> rows);

// Synthetic scenarios

struct SyntheticScenarioSpec {
  double ego_speed_mps = 20.0;
  double initial_distance_m = 60.0;
  double closing_speed_mps = 20.0;
  double fps = 30.0;
  double duration_s = 3.0;
  std::string object_class = "car";
  PowerLawModel depth_model = kReferencePowerLaw;
  bool inside_roi = true;
  FrameDims dims{1280, 720};
  double headway_threshold_s = 2.0;
};

struct SyntheticScenario {
  std::vector<FrameDetections> frames;
  VideoLabel label = VideoLabel::NoCrash;
  std::optional<long> first_danger_frame;
};

/// Straight-line approach. Frame t shows the obstacle at its distance at the
/// middle of the frame interval, d(t) = d0 - closing * (t + 1/2) / fps, with
/// box area from the inverse power law. Ground truth: the first frame with
/// 0 < d(t) and d(t) / ego < threshold. Throws InvalidSpec for bad rates or an
/// in-ROI obstacle that reaches zero distance before any alert frame.
SyntheticScenario generate_synthetic_scenario(const SyntheticScenarioSpec& spec);

/// Box centre used for in-ROI / out-of-ROI placement.
PixelPoint synthetic_box_center(const FrameDims& dims, bool inside_roi) noexcept;

/// `count` valid scenarios drawn from a seeded generator. Specs whose sampled
/// headway lands within 1e-9 s of the threshold are redrawn.
std::vector<SyntheticScenarioSpec> random_scenario_specs(std::size_t count, std::uint64_t seed);

// Manifest-driven evaluation

struct VideoManifestEntry {
  std::string video_id;
  VideoLabel label;
  std::filesystem::path detections_path;
  std::string speed;  // m/s literal (optionally km/h suffixed) or path to a per-frame CSV
  std::optional<std::filesystem::path> frames_dir;
};

/// CSV "video_id,label,detections_path,speed,frames_dir". Relative paths are
/// resolved against the manifest's directory. Throws DataError.
std::vector<VideoManifestEntry> read_manifest(const std::filesystem::path& path);

/// Resolves a speed field: a literal speed or a per-frame CSV path.
SpeedTrack resolve_speed(const std::string& speed_field);

/// Frame images inside a directory, named <frame index, 6 digits>.png.
FrameProvider directory_frame_provider(std::filesystem::path dir);

/// ROI type 0 stands for the ROI of the base configuration.
struct EvalOptions {
  std::vector<int> roi_types{2};
  int persistence = 1;
  int jobs = 1;
  /// Restrict delay statistics to crash videos every ROI type got right.
  bool delay_subset_all_correct = false;
};

struct VideoResult {
  std::string video_id;
  VideoLabel truth;
  int roi_type;
  VideoVerdict verdict;
  std::size_t frame_count;
};

struct RoiTypeMetrics {
  int roi_type;
  MetricsReport metrics;
};

struct EvaluationReport {
  std::vector<VideoResult> rows;  // manifest order, then ROI type order
  std::vector<RoiTypeMetrics> per_roi;
};

/// Runs every entry under every requested ROI type (entries evaluated in
/// parallel with `jobs` workers, merged in manifest order).
EvaluationReport evaluate_manifest(std::span<const VideoManifestEntry> entries, const PipelineConfig& base,
                                   const EvalOptions& options);

void write_summary_json(std::ostream& out, const EvaluationReport& report);
void write_rows_csv(std::ostream& out, const EvaluationReport& report);

}  // namespace roadsentry
