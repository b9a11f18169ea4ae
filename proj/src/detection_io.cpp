#include "roadsentry/detection_io.hpp"

#include "roadsentry/error.hpp"

#include <json.hpp>

#include <cmath>
#include <optional>
#include <stdexcept>

namespace roadsentry {

using nlohmann::json;

namespace {

double require_number(const json& j, std::size_t line, const char* what) {
  if (!j.is_number()) throw MalformedRecord(line, std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw MalformedRecord(line, std::string(what) + " must be finite");
  return v;
}

Detection parse_detection(const json& j, std::size_t line) {
  if (!j.is_object()) throw MalformedRecord(line, "detection must be an object");
  const auto bbox = j.find("bbox");
  const auto cls = j.find("class");
  const auto conf = j.find("conf");
  if (bbox == j.end() || cls == j.end() || conf == j.end()) {
    throw MalformedRecord(line, "detection needs \"bbox\", \"class\" and \"conf\"");
  }
  if (!bbox->is_array() || bbox->size() != 4) throw MalformedRecord(line, "bbox must be [x, y, w, h]");

  Detection d;
  d.box = {require_number((*bbox)[0], line, "bbox x"), require_number((*bbox)[1], line, "bbox y"),
           require_number((*bbox)[2], line, "bbox w"), require_number((*bbox)[3], line, "bbox h")};
  if (!(d.box.w > 0.0 && d.box.h > 0.0)) throw MalformedRecord(line, "bbox width and height must be positive");

  if (!cls->is_string() || cls->get_ref<const std::string&>().empty()) {
    throw MalformedRecord(line, "class must be a non-empty string");
  }
  d.class_label = cls->get<std::string>();

  d.confidence = require_number(*conf, line, "conf");
  if (d.confidence < 0.0 || d.confidence > 1.0) throw MalformedRecord(line, "conf must lie in [0, 1]");
  return d;
}

}  // namespace

void validate(const BBox& box) {
  if (!std::isfinite(box.x) || !std::isfinite(box.y) || !std::isfinite(box.w) || !std::isfinite(box.h)) {
    throw std::invalid_argument("bounding box fields must be finite");
  }
  if (!(box.w > 0.0 && box.h > 0.0)) throw std::invalid_argument("bounding box must have positive size");
}

std::vector<FrameDetections> parse_detection_stream(std::istream& in) {
  std::vector<FrameDetections> frames;
  std::optional<long> previous;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;

    json record;
    try {
      record = json::parse(text);
    } catch (const json::parse_error& e) {
      throw MalformedRecord(line, e.what());
    }
    if (!record.is_object()) throw MalformedRecord(line, "record must be a JSON object");
    const auto frame = record.find("frame");
    const auto dets = record.find("detections");
    if (frame == record.end() || dets == record.end()) {
      throw MalformedRecord(line, "record needs \"frame\" and \"detections\"");
    }
    if (!frame->is_number_integer() || frame->get<long>() < 0) {
      throw MalformedRecord(line, "frame must be a non-negative integer");
    }
    if (!dets->is_array()) throw MalformedRecord(line, "detections must be an array");

    FrameDetections fd;
    fd.frame_index = frame->get<long>();
    if (previous && fd.frame_index <= *previous) throw NonMonotonicFrame(line);
    previous = fd.frame_index;
    fd.detections.reserve(dets->size());
    for (const auto& d : *dets) fd.detections.push_back(parse_detection(d, line));
    frames.push_back(std::move(fd));
  }
  return frames;
}

void write_detection_stream(std::ostream& out, const std::vector<FrameDetections>& frames) {
  for (const auto& f : frames) {
    nlohmann::ordered_json dets = nlohmann::ordered_json::array();
    for (const auto& d : f.detections) {
      dets.push_back({{"bbox", {d.box.x, d.box.y, d.box.w, d.box.h}}, {"class", d.class_label}, {"conf", d.confidence}});
    }
    nlohmann::ordered_json record = {{"frame", f.frame_index}, {"detections", std::move(dets)}};
    out << record.dump() << '\n';
  }
}

const ClassSet& default_allowed_classes() {
  static const ClassSet classes{"car", "truck", "bus", "motorbike", "bicycle", "person"};
  return classes;
}

FrameDetections filter_detections(const FrameDetections& frame, double min_conf, const ClassSet& allowed) {
  FrameDetections out{frame.frame_index, {}};
  for (const auto& d : frame.detections) {
    if (d.confidence >= min_conf && allowed.contains(d.class_label)) out.detections.push_back(d);
  }
  return out;
}

}  // namespace roadsentry
