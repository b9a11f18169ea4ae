#pragma once

#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace roadsentry {

/// One calibration photograph: box area of an object at a measured distance.
struct CalibrationSample {
  double area_px2;
  double distance_m;
};

/// d = a * area^b, b < 0.
struct PowerLawModel {
  double a;
  double b;
};

/// d = c2 area^2 + c1 area + c0.
struct QuadraticModel {
  double c2;
  double c1;
  double c0;
};

using DepthModel = std::variant<PowerLawModel, QuadraticModel>;

/// The published area-to-distance curve, used when no fitted model is supplied.
inline constexpr PowerLawModel kReferencePowerLaw{4319.3, -0.589};

/// Predictions below this are reported as NotPhysical.
inline constexpr double kMinPhysicalDistance = 0.1;

struct PowerLawFit {
  PowerLawModel model;
  double rms_log_residual;  // RMS of ln(d) - ln(prediction)
};

/// Ordinary least squares on (ln area, ln distance). Throws NonPositiveSample,
/// DegenerateData (fewer than 2 samples or all areas equal).
PowerLawFit fit_power_law(std::span<const CalibrationSample> data);

/// Degree-2 OLS in (area, distance) with the area column standardized before
/// the normal-equation solve. Throws DegenerateData with fewer than three
/// distinct areas.
QuadraticModel fit_quadratic(std::span<const CalibrationSample> data);

/// Throws NonPositiveArea for area <= 0, NotPhysical below 0.1 m.
double predict_distance(const DepthModel& model, double area_px2);

/// Inverse of a power law: the box area that maps to `distance_m`.
double area_for_distance(const PowerLawModel& model, double distance_m);

/// CSV with header "area_px2,distance_m". Throws DataError.
std::vector<CalibrationSample> read_calibration_csv(std::istream& in);
std::vector<CalibrationSample> read_calibration_csv(const std::filesystem::path& path);

/// "power" or "quadratic".
std::string model_variant_name(const DepthModel& model);

}  // namespace roadsentry
