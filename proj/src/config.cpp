#include "roadsentry/config.hpp"

#include "roadsentry/error.hpp"
#include "text_util.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace roadsentry {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"camera", {"fx", "fy", "cx", "cy", "k1", "k2", "k3", "p1", "p2"}},
      {"thresholds", {"hue_lo", "hue_hi", "sat_lo", "sat_hi", "lightness_min", "white_lightness_min"}},
      {"lane", {"n_windows", "margin", "min_pixels", "xm_per_px", "ym_per_px", "src", "dst"}},
      {"roi", {"source", "type", "left_base_frac", "right_base_frac", "horizon_frac", "apex_half_width_frac"}},
      {"depth", {"model", "a", "b", "c2", "c1", "c0"}},
      {"safety", {"threshold_s"}},
      {"detections", {"min_conf", "classes"}},
      {"frame", {"width", "height"}},
      {"eval", {"persistence"}},
  };
  return keys;
}

class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> text(const char* key) const {
    if (!tree_) return std::nullopt;
    if (auto v = tree_->get_optional<std::string>(key)) return std::string(detail::trim(*v));
    return std::nullopt;
  }

  void number(const char* key, double& target) const {
    if (auto v = text(key)) target = detail::parse_double(*v, ctx(key));
  }

  void integer(const char* key, int& target) const {
    if (auto v = text(key)) target = static_cast<int>(detail::parse_long(*v, ctx(key)));
  }

  std::optional<double> number(const char* key) const {
    if (auto v = text(key)) return detail::parse_double(*v, ctx(key));
    return std::nullopt;
  }

  void quad(const char* key, Quad& target) const {
    auto v = text(key);
    if (!v) return;
    std::istringstream is(*v);
    Quad q;
    for (auto& p : q) {
      std::string xs, ys;
      if (!(is >> xs >> ys)) throw DataError(ctx(key) + ": expected 8 numbers");
      p = PixelPoint(detail::parse_double(xs, ctx(key)), detail::parse_double(ys, ctx(key)));
    }
    std::string extra;
    if (is >> extra) throw DataError(ctx(key) + ": expected 8 numbers");
    target = q;
  }

  std::string ctx(const char* key) const { return fmt::format("[{}] {}", name_, key); }

 private:
  const pt::ptree* tree_;
  std::string name_;
};

Section section(const pt::ptree& root, const std::string& name) {
  auto it = root.find(name);
  return Section(it == root.not_found() ? nullptr : &it->second, name);
}

void check_keys(const pt::ptree& root) {
  for (const auto& [name, body] : root) {
    auto known = known_keys().find(name);
    if (known == known_keys().end()) throw DataError(fmt::format("unknown config section [{}]", name));
    if (!body.data().empty() && body.empty()) throw DataError(fmt::format("'{}' must be a section", name));
    for (const auto& [key, value] : body) {
      if (!known->second.contains(key)) throw DataError(fmt::format("unknown config key [{}] {}", name, key));
    }
  }
}

pt::ptree read_tree(std::istream& in) {
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw DataError(fmt::format("config line {}: {}", e.line(), e.message()));
  }
  check_keys(root);
  return root;
}

std::optional<DepthModel> parse_depth(const Section& s) {
  const auto kind = s.text("model");
  if (!kind) {
    if (s.text("a") || s.text("b") || s.text("c2") || s.text("c1") || s.text("c0")) {
      throw DataError("[depth] coefficients given without model");
    }
    return std::nullopt;
  }
  auto need = [&](const char* key) {
    if (auto v = s.number(key)) return *v;
    throw DataError(fmt::format("{} is required", s.ctx(key)));
  };
  if (*kind == "power") return PowerLawModel{need("a"), need("b")};
  if (*kind == "quadratic") return QuadraticModel{need("c2"), need("c1"), need("c0")};
  throw DataError(fmt::format("[depth] model '{}' must be power or quadratic", *kind));
}

}  // namespace

AppConfig parse_config(std::istream& in, AppConfig base) {
  const pt::ptree root = read_tree(in);
  AppConfig cfg = std::move(base);
  PipelineConfig& p = cfg.pipeline;

  const Section cam = section(root, "camera");
  cam.number("fx", p.lane.camera.fx);
  cam.number("fy", p.lane.camera.fy);
  cam.number("cx", p.lane.camera.cx);
  cam.number("cy", p.lane.camera.cy);
  cam.number("k1", p.lane.camera.k1);
  cam.number("k2", p.lane.camera.k2);
  cam.number("k3", p.lane.camera.k3);
  cam.number("p1", p.lane.camera.p1);
  cam.number("p2", p.lane.camera.p2);

  const Section thr = section(root, "thresholds");
  thr.number("hue_lo", p.lane.thresholds.hue_deg.lo);
  thr.number("hue_hi", p.lane.thresholds.hue_deg.hi);
  thr.number("sat_lo", p.lane.thresholds.saturation.lo);
  thr.number("sat_hi", p.lane.thresholds.saturation.hi);
  thr.number("lightness_min", p.lane.thresholds.lightness_min);
  thr.number("white_lightness_min", p.lane.thresholds.white_lightness_min);

  const Section lane = section(root, "lane");
  lane.integer("n_windows", p.lane.windows.n_windows);
  lane.integer("margin", p.lane.windows.margin);
  lane.integer("min_pixels", p.lane.windows.min_pixels);
  lane.number("xm_per_px", p.lane.scale.xm_per_px);
  lane.number("ym_per_px", p.lane.scale.ym_per_px);
  lane.quad("src", p.lane.src_frac);
  lane.quad("dst", p.lane.dst_frac);

  const Section roi = section(root, "roi");
  if (auto src = roi.text("source")) {
    if (*src == "fixed") {
      p.roi_source = RoiSource::Fixed;
    } else if (*src == "lane") {
      p.roi_source = RoiSource::Lane;
    } else {
      throw DataError(fmt::format("[roi] source '{}' must be fixed or lane", *src));
    }
  }
  if (auto t = roi.text("type")) {
    const long type = detail::parse_long(*t, roi.ctx("type"));
    if (type < 1 || type > 3) throw DataError("[roi] type must be 1, 2 or 3");
    cfg.roi_type = static_cast<int>(type);
    p.roi = roi_preset(*cfg.roi_type);
  }
  roi.number("left_base_frac", p.roi.left_base_frac);
  roi.number("right_base_frac", p.roi.right_base_frac);
  roi.number("horizon_frac", p.roi.horizon_frac);
  roi.number("apex_half_width_frac", p.roi.apex_half_width_frac);

  if (auto model = parse_depth(section(root, "depth"))) p.depth_model = *model;

  section(root, "safety").number("threshold_s", p.headway.threshold_s);

  const Section det = section(root, "detections");
  det.number("min_conf", p.filter.min_conf);
  if (auto classes = det.text("classes")) {
    ClassSet allowed;
    for (auto& c : detail::split_csv(*classes)) {
      if (!c.empty()) allowed.insert(std::move(c));
    }
    if (allowed.empty()) throw DataError("[detections] classes must name at least one class");
    p.filter.allowed = std::move(allowed);
  }

  const Section frame = section(root, "frame");
  frame.integer("width", p.dims.width);
  frame.integer("height", p.dims.height);

  section(root, "eval").integer("persistence", cfg.persistence);
  if (cfg.persistence < 1) throw DataError("[eval] persistence must be at least 1");

  try {
    validate(p);
  } catch (const std::invalid_argument& e) {
    throw DataError(fmt::format("invalid configuration: {}", e.what()));
  }
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path, AppConfig base) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open config {}", path.string()));
  try {
    return parse_config(in, std::move(base));
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

DepthModel load_depth_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open model {}", path.string()));
  try {
    const pt::ptree root = read_tree(in);
    if (auto model = parse_depth(section(root, "depth"))) return *model;
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
  throw DataError(fmt::format("{}: no [depth] model", path.string()));
}

void write_depth_model(std::ostream& out, const DepthModel& model) {
  out << "[depth]\n";
  if (const auto* p = std::get_if<PowerLawModel>(&model)) {
    out << fmt::format("model = power\na = {}\nb = {}\n", p->a, p->b);
  } else {
    const auto& q = std::get<QuadraticModel>(model);
    out << fmt::format("model = quadratic\nc2 = {}\nc1 = {}\nc0 = {}\n", q.c2, q.c1, q.c0);
  }
}

}  // namespace roadsentry
