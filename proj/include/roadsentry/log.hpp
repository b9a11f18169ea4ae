#pragma once

#include <functional>
#include <string_view>

namespace roadsentry {

using WarningSink = std::function<void(std::string_view)>;

/// Replaces the process-wide warning sink (default: stderr). Returns the old one.
WarningSink set_warning_sink(WarningSink sink);

void log_warning(std::string_view message);

/// Solves above this condition estimate emit a warning.
inline constexpr double kConditionWarningThreshold = 1e12;

}  // namespace roadsentry
