#pragma once

#include "roadsentry/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace roadsentry::detail {

inline std::string_view trim(std::string_view s) noexcept {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Plain comma split (no quoting), fields trimmed.
inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::optional<double> try_parse_double(std::string_view s) noexcept {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline double parse_double(std::string_view s, std::string_view context) {
  if (auto v = try_parse_double(s)) return *v;
  throw DataError(fmt::format("{}: '{}' is not a number", context, s));
}

inline long parse_long(std::string_view s, std::string_view context) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw DataError(fmt::format("{}: '{}' is not an integer", context, s));
  }
  return v;
}

}  // namespace roadsentry::detail
