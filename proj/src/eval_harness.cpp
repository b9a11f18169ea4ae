#include "roadsentry/eval_harness.hpp"

#include "roadsentry/error.hpp"
#include "roadsentry/image_io.hpp"
#include "text_util.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <numeric>
#include <set>
#include <thread>

namespace roadsentry {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

const char* to_string(VideoLabel l) noexcept { return l == VideoLabel::Crash ? "crash" : "no_crash"; }

VideoLabel parse_video_label(std::string_view text) {
  if (text == "crash") return VideoLabel::Crash;
  if (text == "no_crash") return VideoLabel::NoCrash;
  throw DataError(fmt::format("label '{}' must be crash or no_crash", text));
}

VideoVerdict video_verdict(std::span<const Verdict> verdicts, int persistence) {
  if (persistence < 1) throw std::invalid_argument("persistence must be at least 1");
  int run = 0;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    run = verdicts[i] == Verdict::Danger ? run + 1 : 0;
    if (run == persistence) return {VideoLabel::Crash, static_cast<long>(i) - persistence + 1};
  }
  return {};
}

VideoVerdict video_verdict(std::span<const FrameReport> reports, int persistence) {
  std::vector<Verdict> verdicts;
  verdicts.reserve(reports.size());
  for (const auto& r : reports) verdicts.push_back(r.frame_verdict);
  VideoVerdict v = video_verdict(std::span<const Verdict>(verdicts), persistence);
  if (v.first_alert_frame) v.first_alert_frame = reports[static_cast<std::size_t>(*v.first_alert_frame)].frame_index;
  return v;
}

std::optional<DelayStats> delay_statistics(std::vector<long> delays) {
  if (delays.empty()) return std::nullopt;
  std::sort(delays.begin(), delays.end());
  DelayStats s;
  s.count = delays.size();
  s.average = static_cast<double>(std::accumulate(delays.begin(), delays.end(), 0L)) / static_cast<double>(s.count);
  s.median = delays[(s.count - 1) / 2];
  return s;
}

MetricsReport compute_metrics(std::span<const EvalRow> rows) {
  if (rows.empty()) throw EmptyEvaluation("no videos to evaluate");
  MetricsReport m;
  std::vector<long> delays;
  for (const auto& r : rows) {
    const bool pred = r.predicted == VideoLabel::Crash;
    const bool truth = r.truth == VideoLabel::Crash;
    if (pred && truth) {
      ++m.confusion.tp;
      if (r.first_alert_frame) delays.push_back(*r.first_alert_frame);
    } else if (pred) {
      ++m.confusion.fp;
    } else if (truth) {
      ++m.confusion.fn;
    } else {
      ++m.confusion.tn;
    }
  }
  m.accuracy = static_cast<double>(m.confusion.tp + m.confusion.tn) / static_cast<double>(m.confusion.total());
  m.frame_delay = delay_statistics(std::move(delays));
  return m;
}

std::vector<VideoManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open manifest {}", path.string()));
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  std::vector<VideoManifestEntry> entries;
  std::set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  bool header_seen = false;
  while (std::getline(in, text)) {
    ++line;
    const std::string_view row = detail::trim(text);
    if (row.empty() || row.front() == '#') continue;
    if (!header_seen) {
      if (row != "video_id,label,detections_path,speed,frames_dir") {
        throw DataError(fmt::format("{}: header must be 'video_id,label,detections_path,speed,frames_dir'",
                                    path.string()));
      }
      header_seen = true;
      continue;
    }
    const auto ctx = fmt::format("{} line {}", path.string(), line);
    auto fields = detail::split_csv(row);
    if (fields.size() == 4) fields.emplace_back();
    if (fields.size() != 5) throw DataError(ctx + ": expected 5 fields");
    if (fields[0].empty()) throw DataError(ctx + ": empty video_id");
    if (!ids.insert(fields[0]).second) throw DataError(fmt::format("{}: duplicate video_id '{}'", ctx, fields[0]));

    VideoManifestEntry e;
    e.video_id = fields[0];
    try {
      e.label = parse_video_label(fields[1]);
    } catch (const DataError& err) {
      throw DataError(fmt::format("{}: {}", ctx, err.what()));
    }
    e.detections_path = resolve(fields[2]);
    if (!fs::is_regular_file(e.detections_path)) {
      throw DataError(fmt::format("{}: detections file {} not found", ctx, e.detections_path.string()));
    }
    if (fields[3].empty()) throw DataError(ctx + ": empty speed");
    if (parse_speed_literal(fields[3])) {
      e.speed = fields[3];
    } else {
      const fs::path speed_path = resolve(fields[3]);
      if (!fs::is_regular_file(speed_path)) {
        throw DataError(fmt::format("{}: speed '{}' is neither a number nor a file", ctx, fields[3]));
      }
      e.speed = speed_path.string();
    }
    if (!fields[4].empty()) {
      e.frames_dir = resolve(fields[4]);
      if (!fs::is_directory(*e.frames_dir)) {
        throw DataError(fmt::format("{}: frames directory {} not found", ctx, e.frames_dir->string()));
      }
    }
    entries.push_back(std::move(e));
  }
  if (!header_seen) throw DataError(fmt::format("{}: empty manifest", path.string()));
  return entries;
}

SpeedTrack resolve_speed(const std::string& speed_field) {
  if (auto v = parse_speed_literal(speed_field)) return SpeedTrack::constant(*v);
  return read_speed_csv(fs::path(speed_field));
}

FrameProvider directory_frame_provider(fs::path dir) {
  return [dir = std::move(dir)](long frame_index) -> std::optional<ImageBuffer> {
    const fs::path p = dir / fmt::format("{:06d}.png", frame_index);
    if (!fs::is_regular_file(p)) return std::nullopt;
    return read_png(p);
  };
}

namespace {

std::vector<VideoResult> evaluate_entry(const VideoManifestEntry& entry, const PipelineConfig& base,
                                        const EvalOptions& options) {
  std::ifstream in(entry.detections_path);
  if (!in) throw DataError(fmt::format("cannot open detections {}", entry.detections_path.string()));
  std::vector<FrameDetections> frames;
  try {
    frames = parse_detection_stream(in);
  } catch (const MalformedRecord& e) {
    throw StreamError(fmt::format("{} line {}: {}", entry.detections_path.string(), e.line(), e.what()));
  } catch (const NonMonotonicFrame& e) {
    throw StreamError(fmt::format("{} line {}: {}", entry.detections_path.string(), e.line(), e.what()));
  }
  const SpeedTrack speeds = resolve_speed(entry.speed);

  std::vector<VideoResult> out;
  for (int type : options.roi_types) {
    PipelineConfig cfg = base;
    if (type != 0) cfg.roi = roi_preset(type);
    FrameProvider provider;
    if (cfg.roi_source == RoiSource::Lane && entry.frames_dir) provider = directory_frame_provider(*entry.frames_dir);
    const auto reports = run_sequence(frames, speeds, cfg, std::move(provider));
    out.push_back({entry.video_id, entry.label, type, video_verdict(std::span<const FrameReport>(reports),
                                                                     options.persistence),
                   reports.size()});
  }
  return out;
}

}  // namespace

EvaluationReport evaluate_manifest(std::span<const VideoManifestEntry> entries, const PipelineConfig& base,
                                   const EvalOptions& options) {
  if (entries.empty()) throw EmptyEvaluation("manifest lists no videos");
  if (options.roi_types.empty()) throw std::invalid_argument("at least one ROI type is required");
  for (int t : options.roi_types) {
    if (t != 0) roi_preset(t);
  }
  if (options.persistence < 1) throw std::invalid_argument("persistence must be at least 1");
  validate(base);

  const std::size_t n = entries.size();
  std::vector<std::vector<VideoResult>> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = evaluate_entry(entries[i], base, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, options.jobs)), 1, n);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  EvaluationReport report;
  for (auto& r : results) std::move(r.begin(), r.end(), std::back_inserter(report.rows));

  std::set<std::string> all_correct;
  if (options.delay_subset_all_correct) {
    for (const auto& entry : entries) {
      if (entry.label == VideoLabel::Crash) all_correct.insert(entry.video_id);
    }
    for (const auto& row : report.rows) {
      if (row.verdict.predicted != row.truth) all_correct.erase(row.video_id);
    }
  }

  for (int type : options.roi_types) {
    std::vector<EvalRow> rows;
    std::vector<long> subset_delays;
    for (const auto& r : report.rows) {
      if (r.roi_type != type) continue;
      rows.push_back({r.verdict.predicted, r.truth, r.verdict.first_alert_frame});
      if (all_correct.contains(r.video_id) && r.verdict.first_alert_frame) {
        subset_delays.push_back(*r.verdict.first_alert_frame);
      }
    }
    MetricsReport m = compute_metrics(rows);
    if (options.delay_subset_all_correct) m.frame_delay = delay_statistics(std::move(subset_delays));
    report.per_roi.push_back({type, m});
  }
  return report;
}

void write_summary_json(std::ostream& out, const EvaluationReport& report) {
  ordered_json per_roi = ordered_json::array();
  for (const auto& p : report.per_roi) {
    ordered_json j;
    if (p.roi_type == 0) {
      j["roi_type"] = "custom";
    } else {
      j["roi_type"] = p.roi_type;
    }
    j["videos"] = p.metrics.confusion.total();
    j["accuracy"] = p.metrics.accuracy;
    j["tp"] = p.metrics.confusion.tp;
    j["fp"] = p.metrics.confusion.fp;
    j["tn"] = p.metrics.confusion.tn;
    j["fn"] = p.metrics.confusion.fn;
    if (p.metrics.frame_delay) {
      j["frame_delay"] = {{"count", p.metrics.frame_delay->count},
                          {"average", p.metrics.frame_delay->average},
                          {"median", p.metrics.frame_delay->median}};
    } else {
      j["frame_delay"] = nullptr;
    }
    per_roi.push_back(std::move(j));
  }
  ordered_json j;
  j["per_roi_type"] = std::move(per_roi);
  out << j.dump(2) << '\n';
}

void write_rows_csv(std::ostream& out, const EvaluationReport& report) {
  out << "video_id,roi_type,truth,predicted,first_alert_frame,frames\n";
  for (const auto& r : report.rows) {
    out << fmt::format("{},{},{},{},{},{}\n", r.video_id, r.roi_type, to_string(r.truth),
                       to_string(r.verdict.predicted),
                       r.verdict.first_alert_frame ? std::to_string(*r.verdict.first_alert_frame) : std::string(),
                       r.frame_count);
  }
}

}  // namespace roadsentry
