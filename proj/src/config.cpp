#include "fusetrack/config.hpp"

#include <cmath>
#include <fstream>
#include <type_traits>
#include <set>
#include <sstream>

#include "fusetrack/error.hpp"
#include "json.hpp"

namespace fusetrack {
namespace {

using nlohmann::json;

// Reads typed members out of one JSON object and rejects leftovers.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& target) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    if constexpr (std::is_unsigned_v<T>) {
      if (!it->is_number_unsigned()) throw ConfigError(where(key) + " must be a non-negative integer");
    }
    try {
      target = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, _] : obj_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown configuration key " + where(key));
    }
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

sim::GraphSpec parse_graph(const json& j) {
  Section s(j, "scenario.graph");
  sim::GraphSpec g;
  if (const json* cams = s.child("cameras")) {
    for (const auto& c : *cams) {
      Section cs(c, "scenario.graph.cameras[]");
      CameraNode node;
      cs.read("id", node.id);
      cs.read("x", node.x);
      cs.read("y", node.y);
      cs.read("radius", node.radius);
      cs.finish();
      g.cameras.push_back(node);
    }
  }
  if (const json* js = s.child("junctions")) {
    for (const auto& c : *js) {
      Section cs(c, "scenario.graph.junctions[]");
      Junction node;
      cs.read("id", node.id);
      cs.read("x", node.x);
      cs.read("y", node.y);
      cs.finish();
      g.junctions.push_back(node);
    }
  }
  if (const json* es = s.child("edges")) {
    for (const auto& e : *es) {
      Section cs(e, "scenario.graph.edges[]");
      RoadEdge edge;
      cs.read("a", edge.a);
      cs.read("b", edge.b);
      cs.read("length", edge.length);
      cs.finish();
      g.edges.push_back(edge);
    }
  }
  s.finish();
  return g;
}

std::vector<sim::VehicleTemplate> parse_vehicles(const json& j) {
  if (!j.is_array()) throw ConfigError("scenario.vehicles: expected an array");
  std::vector<sim::VehicleTemplate> out;
  for (const auto& v : j) {
    Section s(v, "scenario.vehicles[]");
    sim::VehicleTemplate t;
    std::string cls = "car";
    std::vector<int> color{128, 128, 128};
    std::vector<double> shape;
    s.read("id", t.id);
    s.read("class", cls);
    s.read("color", color);
    s.read("route", t.route);
    s.read("start", t.start);
    s.read("v0", t.v0);
    s.read("shape", shape);
    s.read("target", t.target);
    s.finish();
    try {
      t.vehicle_class = appearance::parse_vehicle_class(cls);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("scenario.vehicles[]: ") + e.what());
    }
    require(color.size() == 3, "scenario.vehicles[].color needs three channels");
    for (int c : color) require(c >= 0 && c <= 255, "scenario.vehicles[].color channels must lie in 0..255");
    t.color = {static_cast<std::uint8_t>(color[0]), static_cast<std::uint8_t>(color[1]),
               static_cast<std::uint8_t>(color[2])};
    if (!shape.empty()) t.shape = shape;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

sim::ScenarioConfig preset_by_name(const std::string& name) {
  if (name == "fig6") return sim::fig6_preset();
  if (name == "custom") return sim::ScenarioConfig{};
  throw ConfigError("unknown scenario preset '" + name + "'");
}

void RunConfig::validate() const {
  scenario.validate();
  require(!scenario.graph.cameras.empty(), "scenario needs at least one camera");
  const auto& k = tracking.kalman;
  require(k.p0_position > 0.0 && k.p0_velocity > 0.0, "kalman.p0_* must be > 0");
  require(k.q >= 0.0, "kalman.q must be >= 0");
  require(k.r > 0.0, "kalman.r must be > 0");
  require(std::isfinite(k.v0), "kalman.v0 must be finite");
  try {
    tracking.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < e.byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError("malformed configuration", line, column);
  }

  RunConfig cfg;
  Section root(doc, "");
  root.read("seed", cfg.seed);

  if (const json* sj = root.child("scenario")) {
    Section s(*sj, "scenario");
    s.read("preset", cfg.preset);
    cfg.scenario = preset_by_name(cfg.preset);
    if (const json* g = s.child("graph")) cfg.scenario.graph = parse_graph(*g);
    if (const json* v = s.child("vehicles")) cfg.scenario.vehicles = parse_vehicles(*v);
    auto& sc = cfg.scenario;
    s.read("background_vehicles", sc.background_vehicles);
    s.read("background_window", sc.background_window);
    s.read("background_min_cameras", sc.background_min_cameras);
    s.read("background_max_cameras", sc.background_max_cameras);
    s.read("background_v_lo", sc.background_v_lo);
    s.read("background_v_hi", sc.background_v_hi);
    s.read("start_jitter", sc.start_jitter);
    s.read("horizon", sc.horizon);
    s.read("v_lo", sc.v_lo);
    s.read("v_hi", sc.v_hi);
    s.read("q_sim", sc.q_sim);
    s.read("velocity_obs_interval", sc.velocity_obs_interval);
    s.read("r_sim", sc.r_sim);
    s.read("shape_dim", sc.shape_dim);
    s.finish();
  }
  if (const json* kj = root.child("kalman")) {
    Section s(*kj, "kalman");
    auto& k = cfg.tracking.kalman;
    s.read("p0_position", k.p0_position);
    s.read("p0_velocity", k.p0_velocity);
    s.read("q", k.q);
    s.read("r", k.r);
    s.read("v0", k.v0);
    s.finish();
  }
  if (const json* aj = root.child("appearance")) {
    Section s(*aj, "appearance");
    auto& h = cfg.scenario.histogram;
    std::string metric = "intersection";
    s.read("h_bins", h.h_bins);
    s.read("s_bins", h.s_bins);
    s.read("v_bins", h.v_bins);
    s.read("w_color", cfg.tracking.match.w_color);
    s.read("metric", metric);
    s.read("sigma_hue", cfg.scenario.noise.sigma_hue);
    s.read("sigma_shape", cfg.scenario.noise.sigma_shape);
    s.finish();
    if (metric == "intersection") {
      cfg.tracking.match.metric = appearance::SimilarityMetric::Intersection;
    } else if (metric == "cosine") {
      cfg.tracking.match.metric = appearance::SimilarityMetric::Cosine;
    } else {
      throw ConfigError("appearance.metric must be 'intersection' or 'cosine'");
    }
  }
  if (const json* gj = root.child("gating")) {
    Section s(*gj, "gating");
    s.read("tau", cfg.tracking.gate.tau);
    s.read("v_min", cfg.tracking.gate.v_min);
    s.read("sigma2_floor", cfg.tracking.gate.sigma2_floor);
    s.finish();
  }
  if (const json* tj = root.child("tracker")) {
    Section s(*tj, "tracker");
    s.read("theta_sim", cfg.tracking.theta_sim);
    s.read("max_hops", cfg.tracking.max_hops);
    s.finish();
  }
  root.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open configuration file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

}  // namespace fusetrack
