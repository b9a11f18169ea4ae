#include "roadsentry/cli.hpp"

#include "roadsentry/config.hpp"
#include "roadsentry/depth_model.hpp"
#include "roadsentry/error.hpp"
#include "roadsentry/eval_harness.hpp"
#include "roadsentry/image_io.hpp"
#include "roadsentry/lane_model.hpp"
#include "roadsentry/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace roadsentry::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct Common {
  std::string config_path;
  std::vector<std::string> argv;
  std::chrono::system_clock::time_point started = std::chrono::system_clock::now();

  AppConfig load() const { return config_path.empty() ? AppConfig{} : load_config(config_path); }
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  return out;
}

/// Run metadata goes next to the payload so the payload itself stays reproducible.
void write_sidecar_log(const fs::path& payload, const Common& common, const std::string& summary) {
  std::ofstream log(fs::path(payload.string() + ".log"));
  if (!log) return;
  const auto finished = std::chrono::system_clock::now();
  const auto elapsed = std::chrono::duration<double>(finished - common.started).count();
  fmt::print(log, "command: {}\n", fmt::join(common.argv, " "));
  fmt::print(log, "config: {}\n", common.config_path.empty() ? "(defaults)" : common.config_path);
  fmt::print(log, "started: {:%Y-%m-%dT%H:%M:%S}Z\n", fmt::gmtime(std::chrono::system_clock::to_time_t(common.started)));
  fmt::print(log, "elapsed_s: {:.3f}\n", elapsed);
  log << summary;
}

SpeedTrack speed_from_flag(const std::string& value) {
  if (auto v = parse_speed_literal(value)) return SpeedTrack::constant(*v);
  if (!fs::is_regular_file(value)) {
    throw DataError(fmt::format("--speed '{}' is neither a speed nor a readable CSV file", value));
  }
  return read_speed_csv(fs::path(value));
}

std::optional<int> matching_preset(const RoiSpec& roi) {
  for (int t = 1; t <= 3; ++t) {
    const RoiSpec p = roi_preset(t);
    if (p.left_base_frac == roi.left_base_frac && p.right_base_frac == roi.right_base_frac &&
        p.horizon_frac == roi.horizon_frac && p.apex_half_width_frac == roi.apex_half_width_frac) {
      return t;
    }
  }
  return std::nullopt;
}

std::vector<FrameDetections> load_detections(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open detections {}", path.string()));
  try {
    return parse_detection_stream(in);
  } catch (const MalformedRecord& e) {
    throw StreamError(fmt::format("{} line {}: {}", path.string(), e.line(), e.what()));
  } catch (const NonMonotonicFrame& e) {
    throw StreamError(fmt::format("{} line {}: {}", path.string(), e.line(), e.what()));
  }
}

std::vector<fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(fmt::format("frames directory {} not found", dir.string()));
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// fit-depth

struct FitDepthOpts {
  std::string samples;
  std::string model = "power";
  std::string out;
};

int fit_depth(const FitDepthOpts& o, const Common& common) {
  const auto samples = read_calibration_csv(fs::path(o.samples));
  DepthModel model;
  std::string report;
  if (o.model == "power") {
    const PowerLawFit fit = fit_power_law(samples);
    model = fit.model;
    report = fmt::format("model: power\na: {}\nb: {}\nrms_log_residual: {}\n", fit.model.a, fit.model.b,
                         fit.rms_log_residual);
  } else {
    const QuadraticModel q = fit_quadratic(samples);
    model = q;
    double sq = 0.0;
    for (const auto& s : samples) {
      const double r = q.c2 * s.area_px2 * s.area_px2 + q.c1 * s.area_px2 + q.c0 - s.distance_m;
      sq += r * r;
    }
    report = fmt::format("model: quadratic\nc2: {}\nc1: {}\nc0: {}\nrms_residual_m: {}\n", q.c2, q.c1, q.c0,
                         std::sqrt(sq / static_cast<double>(samples.size())));
  }
  std::cout << report;
  if (!o.out.empty()) {
    auto out = open_output(o.out);
    write_depth_model(out, model);
    write_sidecar_log(o.out, common, report);
  }
  return 0;
}

// roi

struct RoiOpts {
  std::optional<int> roi_type;
  std::string image;
  std::string overlay;
};

int roi_cmd(const RoiOpts& o, const Common& common) {
  const AppConfig app = common.load();
  RoiSpec spec = app.pipeline.roi;
  if (o.roi_type) spec = roi_preset(*o.roi_type);
  FrameDims dims = app.pipeline.dims;
  std::optional<ImageBuffer> image;
  if (!o.image.empty()) {
    image = read_png(o.image);
    dims = image->dims();
  }
  const Polygon roi = build_fixed_roi(spec, dims);
  ordered_json j;
  if (auto t = o.roi_type ? o.roi_type : matching_preset(spec)) {
    j["roi_type"] = *t;
  } else {
    j["roi_type"] = "custom";
  }
  j["width"] = dims.width;
  j["height"] = dims.height;
  j["horizon_y"] = horizon_row(spec, dims);
  ordered_json verts = ordered_json::array();
  for (const auto& v : roi.vertices()) verts.push_back({v.x(), v.y()});
  j["vertices"] = std::move(verts);
  std::cout << j.dump() << '\n';

  if (!o.overlay.empty()) {
    ImageBuffer canvas = image ? to_rgb(*image) : ImageBuffer(dims.width, dims.height, 3, 0);
    draw_polyline(canvas, roi.vertices(), true, kGreen, 2);
    const double hy = horizon_row(spec, dims);
    const std::array<PixelPoint, 2> horizon{PixelPoint(0.0, hy), PixelPoint(dims.width - 1.0, hy)};
    draw_polyline(canvas, horizon, false, kBlue, 1);
    write_png(o.overlay, canvas);
  }
  return 0;
}

// lane

struct LaneOpts {
  std::string frames;
  std::string out_dir;
  std::string report;
  bool keep_going = false;
};

std::string lane_record(const std::string& name, const LaneResult& r) {
  ordered_json j;
  j["frame"] = name;
  j["ok"] = true;
  j["left"] = {r.left.a, r.left.b, r.left.c};
  j["right"] = {r.right.a, r.right.b, r.right.c};
  if (r.curvature_radius_m.is_unbounded()) {
    j["curvature_m"] = "unbounded";
  } else {
    j["curvature_m"] = r.curvature_radius_m.value();
  }
  j["offset_m"] = r.vehicle_offset_m;
  return j.dump();
}

int lane_cmd(const LaneOpts& o, const Common& common) {
  const AppConfig app = common.load();
  const auto files = list_pngs(o.frames);
  if (files.empty()) throw DataError(fmt::format("no PNG frames in {}", o.frames));

  std::ofstream report_file;
  if (!o.report.empty()) report_file = open_output(o.report);
  std::ostream& report = o.report.empty() ? std::cout : report_file;

  if (!o.out_dir.empty()) fs::create_directories(o.out_dir);
  LaneTracker tracker(app.pipeline.lane.windows);
  std::size_t failures = 0;
  for (const auto& file : files) {
    const ImageBuffer frame = to_rgb(read_png(file));
    const double horizon_y = horizon_row(app.pipeline.roi, frame.dims());
    const std::string name = file.filename().string();
    try {
      const LaneDetection lane = detect_lane(frame, app.pipeline.lane, horizon_y, &tracker);
      report << lane_record(name, lane.result) << '\n';
      if (!o.out_dir.empty()) {
        ImageBuffer overlay = frame;
        draw_polyline(overlay, lane.polygon.vertices(), true, kGreen, 3);
        write_png(fs::path(o.out_dir) / name, overlay);
        write_png(fs::path(o.out_dir) / (file.stem().string() + "_warped.png"), mask_to_gray(lane.warped_mask));
      }
    } catch (const ProcessingError& e) {
      tracker.reset();
      if (!o.keep_going) throw ProcessingError(fmt::format("{}: {}", name, e.what()));
      ++failures;
      ordered_json j;
      j["frame"] = name;
      j["ok"] = false;
      j["error"] = e.what();
      report << j.dump() << '\n';
    }
  }
  if (!o.report.empty()) {
    write_sidecar_log(o.report, common, fmt::format("frames: {}\nfailures: {}\n", files.size(), failures));
  }
  return 0;
}

// run

struct RunOpts {
  std::string detections;
  std::string speed;
  std::optional<int> roi_type;
  std::string roi_source;
  std::string model;
  std::string report;
  std::string frames;
  std::string annotate_dir;
};

int run_cmd(const RunOpts& o, const Common& common) {
  AppConfig app = common.load();
  PipelineConfig& cfg = app.pipeline;
  if (o.roi_type) cfg.roi = roi_preset(*o.roi_type);
  if (!o.model.empty()) cfg.depth_model = load_depth_model(o.model);
  if (!o.roi_source.empty()) cfg.roi_source = o.roi_source == "lane" ? RoiSource::Lane : RoiSource::Fixed;
  if (cfg.roi_source == RoiSource::Lane && o.frames.empty()) {
    throw std::invalid_argument("lane ROI needs --frames");
  }
  if (!o.annotate_dir.empty() && o.frames.empty()) throw std::invalid_argument("--annotate-dir needs --frames");
  if (!o.frames.empty() && !fs::is_directory(o.frames)) {
    throw DataError(fmt::format("frames directory {} not found", o.frames));
  }

  if (!o.annotate_dir.empty()) fs::create_directories(o.annotate_dir);
  const auto frames = load_detections(o.detections);
  const SpeedTrack speeds = speed_from_flag(o.speed);
  FrameProvider provider;
  if (!o.frames.empty()) provider = directory_frame_provider(o.frames);

  std::ofstream report_file;
  if (!o.report.empty()) report_file = open_output(o.report);
  std::ostream& report = o.report.empty() ? std::cout : report_file;

  SequenceProcessor proc(cfg, provider);
  std::vector<Verdict> verdicts;
  for (const auto& f : fill_frame_gaps(frames)) {
    const FrameOutcome outcome = proc.process(f, speeds.at(f.frame_index));
    report << report_to_json(outcome.report) << '\n';
    verdicts.push_back(outcome.report.frame_verdict);
    if (!o.annotate_dir.empty()) {
      if (auto image = provider(f.frame_index)) {
        write_png(fs::path(o.annotate_dir) / fmt::format("{:06d}.png", f.frame_index),
                  annotate_frame(*image, f, outcome.report, outcome.roi));
      }
    }
  }
  if (!report) throw DataError("failed writing the report");

  const VideoVerdict v = video_verdict(std::span<const Verdict>(verdicts), app.persistence);
  const std::string summary =
      fmt::format("frames: {}\ndanger_frames: {}\nprediction: {}\nfirst_alert_frame: {}\n", verdicts.size(),
                  std::count(verdicts.begin(), verdicts.end(), Verdict::Danger), to_string(v.predicted),
                  v.first_alert_frame ? std::to_string(*v.first_alert_frame) : "none");
  if (!o.report.empty()) {
    std::cout << summary;
    write_sidecar_log(o.report, common, summary);
  }
  return 0;
}

// eval

struct EvalOpts {
  std::string manifest;
  std::vector<int> roi_types;
  std::optional<int> persistence;
  int jobs = 1;
  bool delay_subset = false;
  std::string summary;
  std::string rows;
};

int eval_cmd(const EvalOpts& o, const Common& common) {
  const AppConfig app = common.load();
  const auto entries = read_manifest(o.manifest);

  EvalOptions options;
  if (!o.roi_types.empty()) {
    options.roi_types = o.roi_types;
  } else {
    options.roi_types = {app.roi_type.value_or(matching_preset(app.pipeline.roi).value_or(0))};
  }
  options.persistence = o.persistence.value_or(app.persistence);
  options.jobs = o.jobs;
  options.delay_subset_all_correct = o.delay_subset;

  const EvaluationReport report = evaluate_manifest(entries, app.pipeline, options);

  if (o.summary.empty()) {
    write_summary_json(std::cout, report);
  } else {
    auto out = open_output(o.summary);
    write_summary_json(out, report);
  }
  if (!o.rows.empty()) {
    auto out = open_output(o.rows);
    write_rows_csv(out, report);
  }
  const std::string meta = fmt::format("videos: {}\njobs: {}\n", entries.size(), o.jobs);
  if (!o.summary.empty()) write_sidecar_log(o.summary, common, meta);
  return 0;
}

// gen-synth

struct SynthOpts {
  double ego = 20.0;
  double d0 = 60.0;
  double closing = 20.0;
  double fps = 30.0;
  double duration = 3.0;
  std::string object_class = "car";
  bool outside = false;
  double threshold = 2.0;
  std::string model;
  std::string out;
  std::optional<std::size_t> random;
  std::uint64_t seed = 1;
  std::string out_dir;
};

void write_stream(const fs::path& path, const std::vector<FrameDetections>& frames) {
  auto out = open_output(path);
  write_detection_stream(out, frames);
  if (!out) throw DataError(fmt::format("failed writing {}", path.string()));
}

int gen_synth_cmd(const SynthOpts& o, const Common& common) {
  const AppConfig app = common.load();
  PowerLawModel depth = kReferencePowerLaw;
  if (!o.model.empty()) {
    const DepthModel m = load_depth_model(o.model);
    const auto* p = std::get_if<PowerLawModel>(&m);
    if (!p) throw DataError("synthetic scenarios need a power-law depth model");
    depth = *p;
  } else if (const auto* p = std::get_if<PowerLawModel>(&app.pipeline.depth_model)) {
    depth = *p;
  }

  if (o.random) {
    if (o.out_dir.empty()) throw std::invalid_argument("--random needs --out-dir");
    fs::create_directories(o.out_dir);
    auto specs = random_scenario_specs(*o.random, o.seed);
    auto manifest = open_output(fs::path(o.out_dir) / "manifest.csv");
    auto truth = open_output(fs::path(o.out_dir) / "truth.csv");
    manifest << "video_id,label,detections_path,speed,frames_dir\n";
    truth << "video_id,label,first_danger_frame,frames\n";
    for (std::size_t i = 0; i < specs.size(); ++i) {
      auto& spec = specs[i];
      spec.depth_model = depth;
      spec.dims = app.pipeline.dims;
      spec.headway_threshold_s = app.pipeline.headway.threshold_s;
      const SyntheticScenario sc = generate_synthetic_scenario(spec);
      const std::string id = fmt::format("synth_{:04d}", i);
      write_stream(fs::path(o.out_dir) / (id + ".jsonl"), sc.frames);
      manifest << fmt::format("{},{},{}.jsonl,{},\n", id, to_string(sc.label), id, spec.ego_speed_mps);
      truth << fmt::format("{},{},{},{}\n", id, to_string(sc.label),
                           sc.first_danger_frame ? std::to_string(*sc.first_danger_frame) : std::string(),
                           sc.frames.size());
    }
    std::cout << fmt::format("scenarios: {}\nseed: {}\n", specs.size(), o.seed);
    return 0;
  }

  if (o.out.empty()) throw std::invalid_argument("gen-synth needs --out or --random with --out-dir");
  SyntheticScenarioSpec spec;
  spec.ego_speed_mps = o.ego;
  spec.initial_distance_m = o.d0;
  spec.closing_speed_mps = o.closing;
  spec.fps = o.fps;
  spec.duration_s = o.duration;
  spec.object_class = o.object_class;
  spec.inside_roi = !o.outside;
  spec.depth_model = depth;
  spec.dims = app.pipeline.dims;
  spec.headway_threshold_s = o.threshold;
  const SyntheticScenario sc = generate_synthetic_scenario(spec);
  write_stream(o.out, sc.frames);
  ordered_json j;
  j["label"] = to_string(sc.label);
  if (sc.first_danger_frame) {
    j["first_danger_frame"] = *sc.first_danger_frame;
  } else {
    j["first_danger_frame"] = nullptr;
  }
  j["frames"] = sc.frames.size();
  std::cout << j.dump() << '\n';
  return 0;
}

}  // namespace

int dispatch(int argc, char** argv) {
  Common common;
  common.argv.assign(argv, argv + argc);

  CLI::App app{"Forward collision warning from dashcam object detections."};
  app.name("roadsentry");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.add_option("-c,--config", common.config_path, "Settings file (INI sections)")->envname("ROADSENTRY_CONFIG");
  app.fallthrough();

  const auto roi_check = CLI::Range(1, 3);

  FitDepthOpts fit;
  auto* fit_cmd = app.add_subcommand("fit-depth", "Fit an area-to-distance model from calibration samples");
  fit_cmd->add_option("--samples", fit.samples, "CSV with header area_px2,distance_m")->required();
  fit_cmd->add_option("--model", fit.model, "Model family")->check(CLI::IsMember({"power", "quadratic"}));
  fit_cmd->add_option("--out", fit.out, "Write the fitted model as a [depth] settings section");

  RoiOpts roi;
  auto* roi_sub = app.add_subcommand("roi", "Print the fixed ROI polygon and optionally draw it");
  roi_sub->add_option("--roi-type", roi.roi_type, "ROI preset 1, 2 or 3")->check(roi_check);
  roi_sub->add_option("--image", roi.image, "PNG frame that sets the size and backs the overlay")
      ->check(CLI::ExistingFile);
  roi_sub->add_option("--overlay", roi.overlay, "Output PNG with the ROI drawn");

  LaneOpts lane;
  auto* lane_sub = app.add_subcommand("lane", "Run lane detection over a directory of PNG frames");
  lane_sub->add_option("--frames", lane.frames, "Directory of PNG frames, processed in name order")->required();
  lane_sub->add_option("--out-dir", lane.out_dir, "Write lane overlays and warped masks here");
  lane_sub->add_option("--report", lane.report, "JSON Lines lane report (default stdout)");
  lane_sub->add_flag("--keep-going", lane.keep_going, "Record failed frames instead of stopping");

  RunOpts run;
  auto* run_sub = app.add_subcommand("run", "Classify every frame of one detection stream");
  run_sub->add_option("--detections", run.detections, "Detection stream (JSON Lines)")->required();
  run_sub->add_option("--speed", run.speed, "Ego speed (15, 15mps, 54kmh) or CSV frame,speed_mps")->required();
  run_sub->add_option("--roi-type", run.roi_type, "ROI preset 1, 2 or 3")->check(roi_check);
  run_sub->add_option("--roi-source", run.roi_source, "fixed or lane")->check(CLI::IsMember({"fixed", "lane"}));
  run_sub->add_option("--model", run.model, "Settings file with a [depth] model");
  run_sub->add_option("--report", run.report, "Per-frame JSON Lines report (default stdout)");
  run_sub->add_option("--frames", run.frames, "Directory of frame images named <index:06>.png");
  run_sub->add_option("--annotate-dir", run.annotate_dir, "Write annotated frames here");

  EvalOpts ev;
  auto* eval_sub = app.add_subcommand("eval", "Evaluate crash prediction over a manifest of videos");
  eval_sub->add_option("--manifest", ev.manifest, "CSV video_id,label,detections_path,speed,frames_dir")
      ->required();
  eval_sub->add_option("--roi-type", ev.roi_types, "ROI presets to evaluate (repeatable)")->check(roi_check);
  eval_sub->add_option("--persistence", ev.persistence, "Consecutive danger frames needed for an alert")
      ->check(CLI::PositiveNumber);
  eval_sub->add_option("--jobs", ev.jobs, "Videos evaluated in parallel")->check(CLI::PositiveNumber);
  eval_sub->add_flag("--delay-subset", ev.delay_subset,
                     "Frame delay only over crash videos every ROI type predicted correctly");
  eval_sub->add_option("--summary", ev.summary, "JSON summary (default stdout)");
  eval_sub->add_option("--rows", ev.rows, "Per-video CSV rows");

  SynthOpts syn;
  auto* syn_sub = app.add_subcommand("gen-synth", "Generate synthetic approach scenarios with ground truth");
  syn_sub->add_option("--ego", syn.ego, "Ego speed m/s");
  syn_sub->add_option("--d0", syn.d0, "Initial distance m");
  syn_sub->add_option("--closing", syn.closing, "Closing speed m/s");
  syn_sub->add_option("--fps", syn.fps, "Frames per second");
  syn_sub->add_option("--duration", syn.duration, "Duration s");
  syn_sub->add_option("--class", syn.object_class, "Object class label");
  syn_sub->add_flag("--outside", syn.outside, "Place the obstacle outside the ROI");
  syn_sub->add_option("--threshold", syn.threshold, "Headway threshold s used for the ground truth");
  syn_sub->add_option("--model", syn.model, "Settings file with a power-law [depth] model");
  syn_sub->add_option("--out", syn.out, "Output detection stream (single scenario)");
  syn_sub->add_option("--random", syn.random, "Generate this many random scenarios")->check(CLI::PositiveNumber);
  syn_sub->add_option("--seed", syn.seed, "Seed for --random");
  syn_sub->add_option("--out-dir", syn.out_dir, "Directory for --random streams, manifest.csv and truth.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*fit_cmd) return fit_depth(fit, common);
    if (*roi_sub) return roi_cmd(roi, common);
    if (*lane_sub) return lane_cmd(lane, common);
    if (*run_sub) return run_cmd(run, common);
    if (*eval_sub) return eval_cmd(ev, common);
    if (*syn_sub) return gen_synth_cmd(syn, common);
  } catch (const DataError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const ProcessingError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  } catch (const fs::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "usage error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  }
  return 1;
}

}  // namespace roadsentry::cli
