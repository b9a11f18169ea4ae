#pragma once

#include "roadsentry/core.hpp"

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string_view>
#include <variant>

namespace roadsentry {

/// Danger orders before Safe; aggregating with min gives "any Danger wins".
enum class Verdict { Danger = 0, Safe = 1 };

const char* to_string(Verdict v) noexcept;

struct HeadwayConfig {
  double threshold_s = 2.0;
};

void validate(const HeadwayConfig& cfg);

struct HeadwayResult {
  Extent headway_s;
  Verdict verdict;
};

/// headway = distance / speed (unbounded at speed 0); Danger iff headway < threshold.
/// Throws NonPositiveDistance for distance <= 0, std::invalid_argument for a
/// negative or non-finite speed.
HeadwayResult classify_headway(double distance_m, double speed_mps, const HeadwayConfig& cfg);

/// Ego speed, either constant or per frame with forward fill.
class SpeedTrack {
 public:
  static SpeedTrack constant(double speed_mps);
  static SpeedTrack per_frame(std::map<long, double> speeds_mps);

  /// Throws MissingSpeed for a frame before the first per-frame entry.
  double at(long frame_index) const;

 private:
  explicit SpeedTrack(std::variant<double, std::map<long, double>> v) : speeds_(std::move(v)) {}

  std::variant<double, std::map<long, double>> speeds_;
};

/// CSV "frame,speed_mps". Throws DataError.
SpeedTrack read_speed_csv(std::istream& in);
SpeedTrack read_speed_csv(const std::filesystem::path& path);

/// Parses "15", "15mps", "15m/s", "54kmh", "54km/h" into m/s; nullopt if the
/// text is not a speed literal.
std::optional<double> parse_speed_literal(std::string_view text);

}  // namespace roadsentry
