#pragma once

#include "roadsentry/depth_model.hpp"

#include <vector>

namespace fixtures {

// Calibration photographs: box area (px^2) of a car at a measured distance (m).
inline std::vector<roadsentry::CalibrationSample> table1() {
  return {{440380, 2},  {239598, 3},  {137138, 4}, {96657, 5}, {67626, 6},
          {47294, 8},   {33631, 10},  {25479, 11}, {12168, 16}};
}

}  // namespace fixtures
