#include "roadsentry/safety_rule.hpp"

#include "roadsentry/error.hpp"
#include "text_util.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace roadsentry {

const char* to_string(Verdict v) noexcept { return v == Verdict::Danger ? "danger" : "safe"; }

void validate(const HeadwayConfig& cfg) {
  if (!(cfg.threshold_s > 0.0) || !std::isfinite(cfg.threshold_s)) {
    throw std::invalid_argument("headway threshold must be positive");
  }
}

HeadwayResult classify_headway(double distance_m, double speed_mps, const HeadwayConfig& cfg) {
  if (!(distance_m > 0.0)) throw NonPositiveDistance(fmt::format("distance {} m must be positive", distance_m));
  if (!(speed_mps >= 0.0) || !std::isfinite(speed_mps)) {
    throw std::invalid_argument("speed must be finite and non-negative");
  }
  // A stationary ego vehicle cannot close the gap.
  const Extent headway = speed_mps == 0.0 ? Extent::unbounded() : Extent(distance_m / speed_mps);
  return {headway, headway.below(cfg.threshold_s) ? Verdict::Danger : Verdict::Safe};
}

SpeedTrack SpeedTrack::constant(double speed_mps) {
  if (!(speed_mps >= 0.0) || !std::isfinite(speed_mps)) throw DataError("speed must be finite and non-negative");
  return SpeedTrack(speed_mps);
}

SpeedTrack SpeedTrack::per_frame(std::map<long, double> speeds_mps) {
  for (const auto& [frame, v] : speeds_mps) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DataError(fmt::format("speed {} at frame {} must be finite and non-negative", v, frame));
    }
  }
  return SpeedTrack(std::move(speeds_mps));
}

double SpeedTrack::at(long frame_index) const {
  if (const auto* c = std::get_if<double>(&speeds_)) return *c;
  const auto& m = std::get<std::map<long, double>>(speeds_);
  auto it = m.upper_bound(frame_index);
  if (it == m.begin()) throw MissingSpeed(fmt::format("no speed is known at or before frame {}", frame_index));
  return std::prev(it)->second;
}

SpeedTrack read_speed_csv(std::istream& in) {
  std::map<long, double> speeds;
  std::string text;
  std::size_t line = 0;
  bool header_seen = false;
  while (std::getline(in, text)) {
    ++line;
    const std::string_view row = detail::trim(text);
    if (row.empty() || row.front() == '#') continue;
    if (!header_seen) {
      if (row != "frame,speed_mps") {
        throw DataError(fmt::format("speed CSV must start with header 'frame,speed_mps', got '{}'", row));
      }
      header_seen = true;
      continue;
    }
    const auto fields = detail::split_csv(row);
    const auto ctx = fmt::format("speed line {}", line);
    if (fields.size() != 2) throw DataError(ctx + " must have two fields");
    const long frame = detail::parse_long(fields[0], ctx);
    if (frame < 0) throw DataError(ctx + ": frame must be non-negative");
    if (!speeds.emplace(frame, detail::parse_double(fields[1], ctx)).second) {
      throw DataError(ctx + ": duplicate frame");
    }
  }
  if (speeds.empty()) throw DataError("speed CSV has no rows");
  return SpeedTrack::per_frame(std::move(speeds));
}

SpeedTrack read_speed_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open speed file {}", path.string()));
  return read_speed_csv(in);
}

std::optional<double> parse_speed_literal(std::string_view text) {
  text = detail::trim(text);
  struct Unit {
    std::string_view suffix;
    double to_mps;
  };
  static constexpr Unit units[] = {{"km/h", 1.0 / 3.6}, {"kmh", 1.0 / 3.6}, {"m/s", 1.0}, {"mps", 1.0}};
  for (const auto& u : units) {
    if (text.size() > u.suffix.size() && text.ends_with(u.suffix)) {
      const auto v = detail::try_parse_double(detail::trim(text.substr(0, text.size() - u.suffix.size())));
      if (!v) return std::nullopt;
      return *v * u.to_mps;
    }
  }
  return detail::try_parse_double(text);
}

}  // namespace roadsentry
