#include "fusetrack/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include "json.hpp"
#include <ostream>

#include "fusetrack/error.hpp"

namespace fusetrack::io {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Maps a byte offset reported by the JSON parser to a 1-based line/column.
std::pair<std::size_t, std::size_t> locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

template <typename T>
T field(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'", line);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type", line);
  }
}

std::vector<double> finite_array(const json& obj, const char* key, std::size_t line) {
  auto values = field<std::vector<double>>(obj, key, line);
  for (double v : values) {
    if (!std::isfinite(v)) throw ParseError(std::string("field '") + key + "' has a non-finite entry", line);
  }
  return values;
}

ordered_json graph_json(const RoadGraph& g) {
  ordered_json cams = ordered_json::array();
  for (const auto& c : g.cameras()) {
    cams.push_back({{"id", c.id}, {"x", c.x}, {"y", c.y}, {"radius", c.radius}});
  }
  ordered_json junctions = ordered_json::array();
  for (const auto& j : g.junctions()) junctions.push_back({{"id", j.id}, {"x", j.x}, {"y", j.y}});
  ordered_json edges = ordered_json::array();
  for (const auto& e : g.edges()) edges.push_back({{"a", e.a}, {"b", e.b}, {"length", e.length}});
  return {{"cameras", cams}, {"junctions", junctions}, {"edges", edges}};
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string format_event(const sim::DetectionEvent& e) {
  ordered_json j;
  j["camera"] = e.camera;
  j["t"] = e.t;
  j["class"] = std::string(appearance::to_string(e.feature.vehicle_class));
  j["shape"] = e.feature.shape;
  j["hist"] = e.feature.histogram.weights();
  if (!e.plate.empty()) j["plate"] = e.plate;
  return j.dump();
}

std::size_t write_event_log(std::span<const sim::DetectionEvent> events, std::ostream& out) {
  std::size_t written = 0;
  for (const auto& e : events) {
    out << format_event(e) << '\n';
    if (!out) throw IoError("event log sink failed after " + std::to_string(written) + " records", written);
    ++written;
  }
  out.flush();
  if (!out) throw IoError("event log sink failed on flush", written);
  return written;
}

std::size_t emit_event_log(const sim::Scenario& scenario, std::ostream& out) {
  return write_event_log(scenario.events, out);
}

std::vector<sim::DetectionEvent> read_event_log(std::istream& in, const appearance::HistogramConfig& cfg) {
  cfg.validate();
  std::vector<sim::DetectionEvent> events;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> shape_len;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("malformed record: " + std::string(e.what()), line_no, e.byte);
    }
    if (!obj.is_object()) throw ParseError("record is not a JSON object", line_no);
    for (const auto& [key, _] : obj.items()) {
      if (key != "camera" && key != "t" && key != "class" && key != "shape" && key != "hist" && key != "plate") {
        throw ParseError("unknown field '" + key + "'", line_no);
      }
    }

    sim::DetectionEvent e;
    e.camera = field<std::string>(obj, "camera", line_no);
    if (e.camera.empty()) throw ParseError("empty camera id", line_no);
    e.t = field<double>(obj, "t", line_no);
    if (!std::isfinite(e.t)) throw ParseError("non-finite timestamp", line_no);
    try {
      e.feature.vehicle_class = appearance::parse_vehicle_class(field<std::string>(obj, "class", line_no));
    } catch (const InvalidArgument& ex) {
      throw ParseError(ex.what(), line_no);
    }
    e.feature.shape = finite_array(obj, "shape", line_no);
    if (!shape_len) shape_len = e.feature.shape.size();
    if (e.feature.shape.size() != *shape_len) {
      throw ParseError("shape length " + std::to_string(e.feature.shape.size()) + " differs from earlier records (" +
                           std::to_string(*shape_len) + ")",
                       line_no);
    }
    auto hist = finite_array(obj, "hist", line_no);
    double sum = 0.0;
    for (double w : hist) sum += w;
    if (std::fabs(sum - 1.0) > 1e-9) throw ParseError("histogram sums to " + format_number(sum) + ", expected 1", line_no);
    try {
      e.feature.histogram = appearance::ColorHistogram::from_weights(cfg, std::move(hist), 1e-9);
    } catch (const InvalidArgument& ex) {
      throw ParseError(ex.what(), line_no);
    }
    if (obj.contains("plate")) e.plate = field<std::string>(obj, "plate", line_no);
    events.push_back(std::move(e));
  }
  if (in.bad()) throw IoError("failed reading event log", events.size());
  return events;
}

void write_scenario(const sim::Scenario& sc, std::ostream& out) {
  ordered_json vehicles = ordered_json::array();
  for (const auto& v : sc.vehicles) {
    vehicles.push_back({{"id", v.id},
                        {"class", std::string(appearance::to_string(v.vehicle_class))},
                        {"color", {v.color.r, v.color.g, v.color.b}},
                        {"shape", v.shape},
                        {"route", v.route},
                        {"start", v.start},
                        {"v0", v.profile.v0},
                        {"target", v.target}});
  }
  ordered_json velocity = ordered_json::object();
  for (const auto& v : sc.vehicles) {
    ordered_json obs = ordered_json::array();
    if (const auto it = sc.velocity.find(v.id); it != sc.velocity.end()) {
      for (const auto& o : it->second) obs.push_back({o.t, o.z});
    }
    velocity[v.id] = obs;
  }
  ordered_json doc;
  doc["seed"] = sc.seed;
  doc["horizon"] = sc.horizon;
  doc["histogram"] = {{"h_bins", sc.histogram.h_bins}, {"s_bins", sc.histogram.s_bins}, {"v_bins", sc.histogram.v_bins}};
  doc["graph"] = graph_json(sc.graph);
  doc["vehicles"] = vehicles;
  doc["velocity"] = velocity;
  out << doc.dump(1) << '\n';
  if (!out) throw IoError("scenario sink failed");
}

sim::Scenario read_scenario(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = locate(text, e.byte);
    throw ParseError("malformed scenario file", line, column);
  }
  sim::Scenario sc;
  try {
    sc.seed = doc.at("seed").get<std::uint64_t>();
    sc.horizon = doc.at("horizon").get<double>();
    const auto& h = doc.at("histogram");
    sc.histogram = {h.at("h_bins").get<int>(), h.at("s_bins").get<int>(), h.at("v_bins").get<int>()};

    const auto& g = doc.at("graph");
    std::vector<CameraNode> cams;
    for (const auto& c : g.at("cameras")) {
      cams.push_back({c.at("id").get<std::string>(), c.at("x").get<double>(), c.at("y").get<double>(),
                      c.at("radius").get<double>()});
    }
    std::vector<Junction> junctions;
    for (const auto& j : g.at("junctions")) {
      junctions.push_back({j.at("id").get<std::string>(), j.at("x").get<double>(), j.at("y").get<double>()});
    }
    std::vector<RoadEdge> edges;
    for (const auto& e : g.at("edges")) {
      edges.push_back({e.at("a").get<std::string>(), e.at("b").get<std::string>(), e.at("length").get<double>()});
    }
    sc.graph = RoadGraph(std::move(cams), std::move(junctions), std::move(edges));

    for (const auto& v : doc.at("vehicles")) {
      sim::VehicleSpec spec;
      spec.id = v.at("id").get<std::string>();
      spec.vehicle_class = appearance::parse_vehicle_class(v.at("class").get<std::string>());
      const auto rgb = v.at("color").get<std::vector<int>>();
      if (rgb.size() != 3) throw ParseError("vehicle colour must have three channels", 0);
      spec.color = {static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
                    static_cast<std::uint8_t>(rgb[2])};
      spec.shape = v.at("shape").get<std::vector<double>>();
      spec.route = v.at("route").get<std::vector<std::string>>();
      spec.start = v.at("start").get<double>();
      spec.profile.v0 = v.at("v0").get<double>();
      spec.target = v.at("target").get<bool>();
      sc.vehicles.push_back(std::move(spec));
    }
    for (const auto& [id, obs] : doc.at("velocity").items()) {
      std::vector<kalman::VelocityObservation> list;
      for (const auto& o : obs) list.push_back({o.at(0).get<double>(), o.at(1).get<double>()});
      sc.velocity.emplace(id, std::move(list));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario file: ") + e.what(), 0);
  } catch (const ConfigError& e) {
    throw ParseError(std::string("scenario file: ") + e.what(), 0);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("scenario file: ") + e.what(), 0);
  }
  return sc;
}

void write_trajectory_geojson(const tracker::Trajectory& traj, const RoadGraph& graph, const ExportInfo& info,
                              std::ostream& out) {
  ordered_json features = ordered_json::array();
  ordered_json line = ordered_json::array();
  for (std::size_t i = 0; i < traj.visits.size(); ++i) {
    const auto& v = traj.visits[i];
    const Point p = graph.position(v.camera);
    ordered_json props;
    props["order"] = i;
    props["camera"] = v.camera;
    props["t"] = v.t;
    props["event"] = v.event ? ordered_json(*v.event) : ordered_json(nullptr);
    props["confidence"] = v.confidence;
    props["survivors"] = v.survivors;
    props["candidates"] = v.candidates;
    props["gap"] = v.gap;
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Point"}, {"coordinates", {p.x, p.y}}}},
                        {"properties", props}});
    line.push_back({p.x, p.y});
  }
  if (traj.visits.size() >= 2) {
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", line}}},
                        {"properties", {{"kind", "path"}}}});
  }

  ordered_json hops = ordered_json::array();
  for (const auto& h : traj.hops) {
    ordered_json gates = ordered_json::array();
    for (const auto& g : h.gates) {
      ordered_json gj;
      gj["camera"] = g.camera;
      gj["all_pass"] = g.params.all_pass;
      gj["mu"] = g.params.all_pass ? ordered_json(nullptr) : ordered_json(g.params.mu);
      gj["sigma2"] = g.params.all_pass ? ordered_json(nullptr) : ordered_json(g.params.sigma2);
      gj["candidates"] = g.candidates;
      gj["survivors"] = g.survivors;
      gates.push_back(gj);
    }
    ordered_json hj;
    hj["from"] = h.from_camera;
    hj["t"] = h.from_time;
    hj["candidates"] = h.candidates;
    hj["comparisons"] = h.comparisons;
    hj["accepted"] = h.accepted;
    hj["gates"] = gates;
    hops.push_back(hj);
  }

  ordered_json props;
  props["mode"] = info.mode;
  props["query"] = info.query;
  props["coordinates"] = "planar metres";
  props["comparisons"] = traj.comparisons();
  props["candidates"] = traj.candidates();
  props["hops"] = hops;

  ordered_json doc;
  doc["type"] = "FeatureCollection";
  doc["properties"] = props;
  doc["features"] = features;
  out << doc.dump(1) << '\n';
  if (!out) throw IoError("trajectory sink failed");
}

}  // namespace fusetrack::io
