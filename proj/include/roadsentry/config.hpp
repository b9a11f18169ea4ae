#pragma once

#include "roadsentry/depth_model.hpp"
#include "roadsentry/pipeline.hpp"

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>

namespace roadsentry {

/// Settings file contents. Sections: [camera], [thresholds], [lane], [roi],
/// [depth], [safety], [detections], [frame], [eval]. Unknown sections or
/// keys are rejected.
struct AppConfig {
  PipelineConfig pipeline;
  /// Preset chosen by [roi] type, if the file names one.
  std::optional<int> roi_type;
  int persistence = 1;
};

/// Throws DataError on syntax errors, unknown keys or bad values.
AppConfig parse_config(std::istream& in, AppConfig base = {});
AppConfig load_config(const std::filesystem::path& path, AppConfig base = {});

/// Reads only the [depth] section of a settings file.
DepthModel load_depth_model(const std::filesystem::path& path);

/// Writes a [depth] section that load_depth_model reads back exactly.
void write_depth_model(std::ostream& out, const DepthModel& model);

}  // namespace roadsentry
