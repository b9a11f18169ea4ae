#include "roadsentry/error.hpp"

#include <fmt/format.h>

namespace roadsentry {

const char* to_string(LaneSide side) noexcept {
  return side == LaneSide::Left ? "left" : "right";
}

MissingLane::MissingLane(LaneSide side)
    : ProcessingError(fmt::format("no lane pixels found for the {} lane", to_string(side))),
      side_(side) {}

InsufficientPixels::InsufficientPixels(LaneSide side, std::size_t found)
    : ProcessingError(fmt::format("{} lane collected {} pixels, at least 6 are needed for a quadratic fit",
                                  to_string(side), found)),
      side_(side) {}

MalformedRecord::MalformedRecord(std::size_t line_no, const std::string& what)
    : DataError(fmt::format("malformed detection record at line {}: {}", line_no, what)),
      line_(line_no) {}

NonMonotonicFrame::NonMonotonicFrame(std::size_t line_no)
    : DataError(fmt::format("frame index at line {} does not increase", line_no)), line_(line_no) {}

NotPhysical::NotPhysical(double predicted)
    : ProcessingError(fmt::format("predicted distance {} m is below the 0.1 m physical floor", predicted)),
      predicted_(predicted) {}

}  // namespace roadsentry
