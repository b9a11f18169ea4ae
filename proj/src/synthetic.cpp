#include "roadsentry/eval_harness.hpp"

#include "roadsentry/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace roadsentry {

namespace {

void validate(const SyntheticScenarioSpec& s) {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(s.ego_speed_mps)) throw InvalidSpec("ego speed must be positive");
  if (!positive(s.initial_distance_m)) throw InvalidSpec("initial distance must be positive");
  if (!(s.closing_speed_mps >= 0.0) || !std::isfinite(s.closing_speed_mps)) {
    throw InvalidSpec("closing speed must be finite and non-negative");
  }
  if (!(s.fps >= 1.0) || !std::isfinite(s.fps)) throw InvalidSpec("fps must be at least 1");
  if (!positive(s.duration_s)) throw InvalidSpec("duration must be positive");
  if (!positive(s.headway_threshold_s)) throw InvalidSpec("headway threshold must be positive");
  if (!(s.depth_model.a > 0.0 && s.depth_model.b < 0.0)) throw InvalidSpec("depth model must be a decreasing power law");
  if (s.dims.width < 2 || s.dims.height < 2) throw InvalidSpec("frame must be at least 2x2");
}

}  // namespace

PixelPoint synthetic_box_center(const FrameDims& dims, bool inside_roi) noexcept {
  const double w = dims.width;
  const double h = dims.height;
  return inside_roi ? PixelPoint(0.5 * w, 0.8 * h) : PixelPoint(0.03 * w, 0.9 * h);
}

SyntheticScenario generate_synthetic_scenario(const SyntheticScenarioSpec& spec) {
  validate(spec);
  const long n_frames = std::max(1L, std::lround(spec.duration_s * spec.fps));
  const bool threat_candidate = spec.inside_roi && default_allowed_classes().contains(spec.object_class);
  const PixelPoint center = synthetic_box_center(spec.dims, spec.inside_roi);

  SyntheticScenario out;
  out.frames.reserve(static_cast<std::size_t>(n_frames));
  bool reached_zero = false;
  for (long t = 0; t < n_frames; ++t) {
    const double d = spec.initial_distance_m - spec.closing_speed_mps * (static_cast<double>(t) + 0.5) / spec.fps;
    FrameDetections frame{t, {}};
    if (d > 0.0) {
      if (threat_candidate && !out.first_danger_frame && d / spec.ego_speed_mps < spec.headway_threshold_s) {
        out.first_danger_frame = t;
      }
      // 4:3 box with the exact target area.
      const double area = area_for_distance(spec.depth_model, d);
      const double bw = std::sqrt(area * 4.0 / 3.0);
      const double bh = area / bw;
      frame.detections.push_back({{center.x() - 0.5 * bw, center.y() - 0.5 * bh, bw, bh}, spec.object_class, 0.9});
    } else {
      reached_zero = true;
    }
    out.frames.push_back(std::move(frame));
  }
  if (threat_candidate && reached_zero && !out.first_danger_frame) {
    throw InvalidSpec(fmt::format("obstacle reaches zero distance without an alert frame (closing {} m per frame)",
                                  spec.closing_speed_mps / spec.fps));
  }
  out.label = out.first_danger_frame ? VideoLabel::Crash : VideoLabel::NoCrash;
  return out;
}

namespace {

bool near_threshold(const SyntheticScenarioSpec& s) {
  const long n_frames = std::max(1L, std::lround(s.duration_s * s.fps));
  for (long t = 0; t < n_frames; ++t) {
    const double d = s.initial_distance_m - s.closing_speed_mps * (static_cast<double>(t) + 0.5) / s.fps;
    if (d > 0.0 && std::abs(d / s.ego_speed_mps - s.headway_threshold_s) < 1e-9) return true;
  }
  return false;
}

}  // namespace

std::vector<SyntheticScenarioSpec> random_scenario_specs(std::size_t count, std::uint64_t seed) {
  static constexpr std::array<double, 6> kFps{10.0, 15.0, 24.0, 25.0, 30.0, 60.0};
  static constexpr std::array<const char*, 7> kClasses{"car", "truck", "bus", "motorbike",
                                                       "bicycle", "person", "traffic light"};
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  std::vector<SyntheticScenarioSpec> specs;
  specs.reserve(count);
  while (specs.size() < count) {
    SyntheticScenarioSpec s;
    s.ego_speed_mps = uniform(3.0, 35.0);
    s.initial_distance_m = uniform(5.0, 120.0);
    s.closing_speed_mps = pick(8) == 0 ? 0.0 : uniform(0.5, 30.0);
    s.fps = kFps[pick(kFps.size())];
    s.duration_s = uniform(1.0, 6.0);
    s.object_class = kClasses[pick(8) == 0 ? kClasses.size() - 1 : pick(kClasses.size() - 1)];
    s.inside_roi = pick(5) != 0;
    if (near_threshold(s)) continue;
    try {
      generate_synthetic_scenario(s);
    } catch (const InvalidSpec&) {
      continue;
    }
    specs.push_back(std::move(s));
  }
  return specs;
}

}  // namespace roadsentry
