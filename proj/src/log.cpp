#include "roadsentry/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace roadsentry {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& sink() {
  static WarningSink s = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  return s;
}

}  // namespace

WarningSink set_warning_sink(WarningSink next) {
  std::lock_guard lock(sink_mutex());
  return std::exchange(sink(), std::move(next));
}

void log_warning(std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (sink()) sink()(message);
}

}  // namespace roadsentry
