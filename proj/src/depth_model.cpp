#include "roadsentry/depth_model.hpp"

#include "roadsentry/error.hpp"
#include "roadsentry/least_squares.hpp"
#include "roadsentry/log.hpp"
#include "text_util.hpp"

#include <fmt/format.h>

#include <Eigen/Core>

#include <cmath>
#include <fstream>
#include <set>

namespace roadsentry {

namespace {

void require_positive(std::span<const CalibrationSample> data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& s = data[i];
    if (!(s.area_px2 > 0.0) || !(s.distance_m > 0.0) || !std::isfinite(s.area_px2) || !std::isfinite(s.distance_m)) {
      throw NonPositiveSample(fmt::format("calibration sample {} (area {}, distance {}) must be positive and finite", i,
                                          s.area_px2, s.distance_m));
    }
  }
}

}  // namespace

PowerLawFit fit_power_law(std::span<const CalibrationSample> data) {
  require_positive(data);
  if (data.size() < 2) throw DegenerateData("a power-law fit needs at least two samples");

  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::ArrayXd lx(n);
  Eigen::ArrayXd ly(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lx(i) = std::log(data[i].area_px2);
    ly(i) = std::log(data[i].distance_m);
  }
  const Eigen::ArrayXd dx = lx - lx.mean();
  const Eigen::ArrayXd dy = ly - ly.mean();
  const double sxx = dx.square().sum();
  if (!(sxx > 0.0)) throw DegenerateData("all calibration areas are equal");

  const double b = (dx * dy).sum() / sxx;
  const double ln_a = ly.mean() - b * lx.mean();
  if (!(b < 0.0)) throw DegenerateData(fmt::format("fitted exponent {} is not negative; distance must fall as area grows", b));
  const double rms = std::sqrt((ly - (ln_a + b * lx)).square().mean());
  return {{std::exp(ln_a), b}, rms};
}

QuadraticModel fit_quadratic(std::span<const CalibrationSample> data) {
  require_positive(data);
  std::set<double> distinct;
  for (const auto& s : data) distinct.insert(s.area_px2);
  if (distinct.size() < 3) throw DegenerateData("a quadratic fit needs at least three distinct areas");

  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::VectorXd area(n);
  Eigen::VectorXd dist(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    area(i) = data[i].area_px2;
    dist(i) = data[i].distance_m;
  }
  const auto ls = fit_quadratic_ls(area, dist);
  if (!ls) throw DegenerateData("calibration areas have no spread");
  if (ls->condition > kConditionWarningThreshold) {
    log_warning(fmt::format("quadratic depth fit is ill-conditioned (condition ~{:.3g})", ls->condition));
  }
  return {ls->coeffs(0), ls->coeffs(1), ls->coeffs(2)};
}

double predict_distance(const DepthModel& model, double area_px2) {
  if (!(area_px2 > 0.0)) throw NonPositiveArea(fmt::format("box area {} must be positive", area_px2));
  const double d = std::visit(
      [area_px2](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, PowerLawModel>) {
          return m.a * std::pow(area_px2, m.b);
        } else {
          return (m.c2 * area_px2 + m.c1) * area_px2 + m.c0;
        }
      },
      model);
  if (!(d >= kMinPhysicalDistance)) throw NotPhysical(d);
  return d;
}

double area_for_distance(const PowerLawModel& model, double distance_m) {
  if (!(distance_m > 0.0)) throw NonPositiveDistance("distance must be positive");
  return std::pow(distance_m / model.a, 1.0 / model.b);
}

std::vector<CalibrationSample> read_calibration_csv(std::istream& in) {
  std::vector<CalibrationSample> out;
  std::string text;
  std::size_t line = 0;
  bool header_seen = false;
  while (std::getline(in, text)) {
    ++line;
    const std::string_view row = detail::trim(text);
    if (row.empty() || row.front() == '#') continue;
    if (!header_seen) {
      if (row != "area_px2,distance_m") {
        throw DataError(fmt::format("calibration CSV must start with header 'area_px2,distance_m', got '{}'", row));
      }
      header_seen = true;
      continue;
    }
    const auto fields = detail::split_csv(row);
    if (fields.size() != 2) throw DataError(fmt::format("calibration line {} must have two fields", line));
    const auto ctx = fmt::format("calibration line {}", line);
    out.push_back({detail::parse_double(fields[0], ctx), detail::parse_double(fields[1], ctx)});
  }
  if (!header_seen) throw DataError("calibration CSV is empty");
  return out;
}

std::vector<CalibrationSample> read_calibration_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open calibration file {}", path.string()));
  return read_calibration_csv(in);
}

std::string model_variant_name(const DepthModel& model) {
  return std::holds_alternative<PowerLawModel>(model) ? "power" : "quadratic";
}

}  // namespace roadsentry
