#include "fusetrack/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <tuple>

#include "fusetrack/error.hpp"

namespace fusetrack::sim {
namespace {

using appearance::Hsv;
using appearance::Rgb;

// Rng stream tags.
constexpr std::uint64_t kBackgroundTag = 1;
constexpr std::uint64_t kStartTag = 2;
constexpr std::uint64_t kShapeTag = 1'000;
constexpr std::uint64_t kMotionTag = 100'000;
constexpr std::uint64_t kAppearanceTag = 200'000;
constexpr std::uint64_t kObservationTag = 300'000;

constexpr std::array<Rgb, 8> kPalette{{
    {220, 30, 30},    // red
    {235, 235, 235},  // white
    {25, 25, 28},     // black
    {170, 172, 178},  // silver
    {20, 50, 170},    // blue
    {30, 150, 60},    // green
    {230, 200, 20},   // yellow
    {240, 120, 20},   // orange
}};

// Time within [0, step] at which a uniformly accelerating segment starting at
// speed v covers `delta` metres. Written in the cancellation-free form.
double crossing_time(double v, double v_next, double step, double delta) {
  if (delta <= 0.0) return 0.0;
  const double accel = (v_next - v) / step;
  const double disc = std::max(0.0, v * v + 2.0 * accel * delta);
  return std::clamp(2.0 * delta / (v + std::sqrt(disc)), 0.0, step);
}

std::vector<std::string> random_route(const RoadGraph& graph, std::size_t min_cameras,
                                      std::size_t max_cameras, Rng& rng) {
  const auto& cams = graph.cameras();
  const std::size_t want = min_cameras + rng.below(max_cameras - min_cameras + 1);
  std::vector<std::string> route{cams[rng.below(cams.size())].id};
  std::set<std::string> visited{route.front()};
  while (route.size() < want) {
    std::vector<std::string> options;
    for (const auto& c : graph.neighbouring_cameras(route.back())) {
      if (!visited.contains(c)) options.push_back(c);
    }
    if (options.empty()) break;
    const std::string& next = options[rng.below(options.size())];
    visited.insert(next);
    route.push_back(next);
  }
  return route;
}

}  // namespace

void VelocityProfile::validate() const {
  if (!(v_lo > 0.0) || !(v_hi >= v_lo)) throw ConfigError("velocity bounds need 0 < v_lo <= v_hi");
  if (!(q_sim >= 0.0)) throw ConfigError("q_sim must be >= 0");
  if (!(step > 0.0)) throw ConfigError("velocity step must be > 0");
  if (!std::isfinite(v0)) throw ConfigError("v0 must be finite");
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i].t < steps[i - 1].t) throw ConfigError("step changes must be time-ordered");
  }
}

VelocityWalk::VelocityWalk(const VelocityProfile& profile, Rng& rng) : profile_(profile), rng_(rng) {
  profile_.validate();
}

double VelocityWalk::next() {
  const double t = static_cast<double>(index_) * profile_.step;
  double v = index_ == 0 ? profile_.v0 : current_ + std::sqrt(profile_.q_sim) * rng_.normal();
  while (next_change_ < profile_.steps.size() && profile_.steps[next_change_].t <= t) {
    v += profile_.steps[next_change_].delta;
    ++next_change_;
  }
  current_ = std::clamp(v, profile_.v_lo, profile_.v_hi);
  ++index_;
  return current_;
}

double VelocityTrace::truth_at(double t) const {
  if (truth.empty()) throw InvalidArgument("empty velocity trace");
  const double u = t / step;
  if (u <= 0.0) return truth.front();
  const auto k = static_cast<std::size_t>(std::floor(u));
  if (k + 1 >= truth.size()) return truth.back();
  const double frac = u - static_cast<double>(k);
  return truth[k] + frac * (truth[k + 1] - truth[k]);
}

std::vector<double> even_times(double horizon, std::size_t count) {
  std::vector<double> out;
  if (count == 0) return out;
  if (count == 1) return {0.0};
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(horizon * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.back() = horizon;
  return out;
}

VelocityTrace simulate_velocity_trace(const VelocityProfile& profile, double horizon,
                                      std::size_t obs_count, double r_sim, Rng& rng) {
  if (!(horizon >= 0.0)) throw InvalidArgument("horizon must be >= 0");
  if (!(r_sim >= 0.0)) throw InvalidArgument("r_sim must be >= 0");
  VelocityTrace trace;
  trace.step = profile.step;
  VelocityWalk walk(profile, rng);
  const auto samples = static_cast<std::size_t>(std::ceil(horizon / profile.step)) + 1;
  trace.truth.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) trace.truth.push_back(walk.next());

  const double noise = std::sqrt(r_sim);
  for (double t : even_times(horizon, obs_count)) {
    trace.observations.push_back({t, trace.truth_at(t) + noise * rng.normal()});
  }
  return trace;
}

double VehicleMotion::position_at(double t) const {
  if (speed.empty()) return s0;
  const double u = (t - start) / step;
  if (u <= 0.0) return s0;
  auto k = static_cast<std::size_t>(std::floor(u));
  if (k + 1 >= speed.size()) k = speed.size() - 2;
  const double tau = std::min(t - start - static_cast<double>(k) * step, step);
  const double accel = (speed[k + 1] - speed[k]) / step;
  return coordinate[k] + speed[k] * tau + 0.5 * accel * tau * tau;
}

void ScenarioConfig::validate() const {
  if (!(horizon > 0.0)) throw ConfigError("horizon must be > 0");
  if (!(v_lo > 0.0) || !(v_hi >= v_lo)) throw ConfigError("velocity bounds need 0 < v_lo <= v_hi");
  if (!(q_sim >= 0.0)) throw ConfigError("q_sim must be >= 0");
  if (!(r_sim >= 0.0)) throw ConfigError("r_sim must be >= 0");
  if (!(velocity_obs_interval > 0.0)) throw ConfigError("velocity_obs_interval must be > 0");
  if (shape_dim == 0) throw ConfigError("shape_dim must be >= 1");
  if (!(noise.sigma_hue >= 0.0) || !(noise.sigma_shape >= 0.0)) {
    throw ConfigError("appearance noise must be >= 0");
  }
  if (noise.patch_size < 1) throw ConfigError("patch_size must be >= 1");
  if (!(noise.dark_fraction >= 0.0 && noise.dark_fraction < 1.0)) {
    throw ConfigError("dark_fraction must lie in [0, 1)");
  }
  if (background_min_cameras < 1 || background_max_cameras < background_min_cameras) {
    throw ConfigError("background route bounds need 1 <= min <= max");
  }
  if (!(background_window >= 0.0) || !(start_jitter >= 0.0)) {
    throw ConfigError("background_window and start_jitter must be >= 0");
  }
  if (!(background_v_lo > 0.0) || !(background_v_hi >= background_v_lo)) {
    throw ConfigError("background speed range needs 0 < lo <= hi");
  }
  try {
    histogram.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  std::set<std::string> ids;
  for (const auto& v : vehicles) {
    if (v.id.empty()) throw ConfigError("vehicle id must not be empty");
    if (!ids.insert(v.id).second) throw ConfigError("duplicate vehicle id '" + v.id + "'");
    if (v.route.empty()) throw ConfigError("vehicle " + v.id + " has an empty route");
    if (v.shape && v.shape->size() != shape_dim) {
      throw ConfigError("vehicle " + v.id + ": shape length differs from shape_dim");
    }
    if (!(v.v0 > 0.0)) throw ConfigError("vehicle " + v.id + ": v0 must be > 0");
  }
}

GraphSpec fig6_graph() {
  GraphSpec g;
  g.cameras = {
      {"A", 300.0, 1500.0, 30.0},
      {"B", 900.0, 1000.0, 30.0},
      {"C", 1000.0, 1700.0, 30.0},
      {"D", 600.0, 300.0, 30.0},
      {"E", 1700.0, 1800.0, 30.0},
  };
  g.edges = {
      {"A", "B", 800.0}, {"B", "D", 780.0}, {"B", "C", 720.0},
      {"C", "E", 720.0}, {"A", "C", 750.0},
  };
  return g;
}

ScenarioConfig fig6_preset() {
  ScenarioConfig cfg;
  cfg.graph = fig6_graph();
  cfg.vehicles = {
      {"a", VehicleClass::Truck, {220, 30, 30}, {"D", "B", "A"}, 120.0, 11.0, std::nullopt, true},
      {"b", VehicleClass::Car, {20, 50, 170}, {"E", "C", "B", "D"}, 150.0, 14.0, std::nullopt, true},
      {"c", VehicleClass::Bus, {235, 235, 235}, {"A", "C", "E"}, 200.0, 10.0, std::nullopt, true},
      {"d", VehicleClass::Motor, {230, 200, 20}, {"D", "B", "C", "E"}, 260.0, 15.0, std::nullopt, true},
  };
  cfg.background_vehicles = 80;
  cfg.start_jitter = 30.0;
  return cfg;
}

AppearanceFeature observe_appearance(const VehicleSpec& vehicle, const AppearanceNoise& noise,
                                     const appearance::HistogramConfig& cfg, Rng& rng) {
  const Hsv base = appearance::rgb_to_hsv(vehicle.color);
  const double shade = rng.normal(0.0, 0.02);  // per-detection illumination

  const int side = noise.patch_size;
  const auto pixels = static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
  const auto dark = static_cast<std::size_t>(std::lround(noise.dark_fraction * static_cast<double>(pixels)));
  std::vector<Rgb> patch;
  patch.reserve(pixels);
  for (std::size_t i = 0; i < pixels; ++i) {
    Hsv px;
    if (i < dark) {
      // windows and tyres
      px = Hsv{0.0, rng.uniform(0.0, 0.1), rng.uniform(0.04, 0.2)};
    } else {
      px = Hsv{base.h + rng.normal(0.0, noise.sigma_hue), base.s + rng.normal(0.0, 0.04),
               base.v + shade + rng.normal(0.0, 0.03)};
    }
    patch.push_back(appearance::hsv_to_rgb(px));
  }

  AppearanceFeature f;
  f.vehicle_class = vehicle.vehicle_class;
  f.histogram = appearance::compute_histogram(appearance::PixelImage(side, side, std::move(patch)), cfg);
  f.shape.reserve(vehicle.shape.size());
  for (double s : vehicle.shape) f.shape.push_back(s + rng.normal(0.0, noise.sigma_shape));
  return f;
}

const VehicleSpec* Scenario::vehicle(const std::string& id) const {
  for (const auto& v : vehicles) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

std::vector<std::size_t> Scenario::passages_of(const std::string& id) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].plate == id) out.push_back(i);
  }
  return out;
}

Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();

  Scenario sc;
  sc.seed = seed;
  sc.horizon = config.horizon;
  sc.histogram = config.histogram;
  sc.graph = RoadGraph(config.graph.cameras, config.graph.junctions, config.graph.edges);

  // Vehicle specs: configured targets first, then background traffic.
  Rng start_rng = Rng::stream(seed, kStartTag);
  for (const auto& tpl : config.vehicles) {
    VehicleSpec v;
    v.id = tpl.id;
    v.vehicle_class = tpl.vehicle_class;
    v.color = tpl.color;
    v.route = tpl.route;
    v.start = tpl.start + (config.start_jitter > 0.0 ? start_rng.uniform(0.0, config.start_jitter) : 0.0);
    v.profile = VelocityProfile{tpl.v0, config.q_sim, config.v_lo, config.v_hi, 1.0, {}};
    v.target = tpl.target;
    if (tpl.shape) v.shape = *tpl.shape;
    sc.vehicles.push_back(std::move(v));
  }
  if (config.background_vehicles > 0 && sc.graph.cameras().empty()) {
    throw ConfigError("background traffic needs at least one camera");
  }
  Rng bg = Rng::stream(seed, kBackgroundTag);
  constexpr std::array<double, 4> kClassWeights{0.55, 0.2, 0.1, 0.15};
  for (std::size_t i = 0; i < config.background_vehicles; ++i) {
    VehicleSpec v;
    char id[16];
    std::snprintf(id, sizeof id, "bg%03zu", i);
    v.id = id;
    double pick = bg.uniform();
    std::size_t cls = 0;
    while (cls + 1 < kClassWeights.size() && pick >= kClassWeights[cls]) pick -= kClassWeights[cls++];
    v.vehicle_class = static_cast<VehicleClass>(cls);
    v.color = kPalette[bg.below(kPalette.size())];
    v.route = random_route(sc.graph, config.background_min_cameras, config.background_max_cameras, bg);
    v.start = bg.uniform(0.0, config.background_window);
    const double v0 = bg.uniform(config.background_v_lo, config.background_v_hi);
    v.profile = VelocityProfile{v0, config.q_sim, config.v_lo, config.v_hi, 1.0, {}};
    sc.vehicles.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < sc.vehicles.size(); ++i) {
    VehicleSpec& v = sc.vehicles[i];
    if (!v.shape.empty()) continue;
    Rng shape_rng = Rng::stream(seed, kShapeTag + i);
    v.shape.resize(config.shape_dim);
    for (double& s : v.shape) s = shape_rng.normal();
  }

  for (std::size_t vi = 0; vi < sc.vehicles.size(); ++vi) {
    const VehicleSpec& v = sc.vehicles[vi];

    VehicleMotion motion;
    motion.start = v.start;
    motion.step = v.profile.step;
    motion.node_coordinates.push_back(0.0);
    for (std::size_t i = 0; i < v.route.size(); ++i) {
      if (!sc.graph.has_node(v.route[i])) {
        throw ConfigError("vehicle " + v.id + " routes through unknown node '" + v.route[i] + "'");
      }
      if (i == 0) continue;
      const auto len = sc.graph.edge_length(v.route[i - 1], v.route[i]);
      if (!len) {
        throw ConfigError("vehicle " + v.id + " routes through non-adjacent nodes " + v.route[i - 1] +
                          "-" + v.route[i]);
      }
      motion.node_coordinates.push_back(motion.node_coordinates.back() + *len);
    }

    // Passage thresholds: the vehicle is detected on entering a coverage disc.
    struct Threshold {
      std::string camera;
      double s;
    };
    std::vector<Threshold> thresholds;
    for (std::size_t i = 0; i < v.route.size(); ++i) {
      if (const CameraNode* cam = sc.graph.camera(v.route[i])) {
        thresholds.push_back({cam->id, motion.node_coordinates[i] - cam->radius});
      }
    }
    const CameraNode* first = sc.graph.camera(v.route.front());
    motion.s0 = first ? -first->radius : 0.0;
    const double s_end = thresholds.empty() ? motion.node_coordinates.back()
                                            : std::max(thresholds.back().s, motion.s0);

    Rng motion_rng = Rng::stream(seed, kMotionTag + vi);
    VelocityWalk walk(v.profile, motion_rng);
    motion.speed.push_back(walk.next());
    motion.coordinate.push_back(motion.s0);
    std::vector<std::pair<std::string, double>> passages;
    std::size_t next = 0;
    auto emit_crossed = [&](std::size_t k) {
      // Thresholds crossed between samples k and k + 1.
      while (next < thresholds.size() && thresholds[next].s <= motion.coordinate[k + 1]) {
        const double delta = thresholds[next].s - motion.coordinate[k];
        const double tau = crossing_time(motion.speed[k], motion.speed[k + 1], motion.step, delta);
        passages.push_back({thresholds[next].camera, motion.start + static_cast<double>(k) * motion.step + tau});
        ++next;
      }
    };
    while (next < thresholds.size() && thresholds[next].s <= motion.s0) {
      passages.push_back({thresholds[next].camera, motion.start});
      ++next;
    }
    while (motion.coordinate.back() < s_end &&
           motion.start + static_cast<double>(motion.speed.size() - 1) * motion.step <= config.horizon) {
      const double v_prev = motion.speed.back();
      const double v_next = walk.next();
      motion.speed.push_back(v_next);
      motion.coordinate.push_back(motion.coordinate.back() + 0.5 * (v_prev + v_next) * motion.step);
      emit_crossed(motion.speed.size() - 2);
    }
    if (motion.speed.size() == 1) {
      // Keep at least one segment so position_at stays well defined.
      const double v_next = walk.next();
      motion.speed.push_back(v_next);
      motion.coordinate.push_back(motion.coordinate.back() + 0.5 * (motion.speed[0] + v_next) * motion.step);
    }

    Rng look_rng = Rng::stream(seed, kAppearanceTag + vi);
    double last_t = v.start;
    for (const auto& [camera, t] : passages) {
      if (t > config.horizon) continue;
      sc.events.push_back({camera, t, observe_appearance(v, config.noise, config.histogram, look_rng), v.id});
      last_t = std::max(last_t, t);
    }

    // Sparse motion-sensor readings over the observed part of the trip.
    std::vector<kalman::VelocityObservation> obs;
    if (v.start <= config.horizon) {
      Rng obs_rng = Rng::stream(seed, kObservationTag + vi);
      const double noise = std::sqrt(config.r_sim);
      VelocityTrace trace{motion.step, motion.speed, {}};
      for (std::size_t j = 0;; ++j) {
        const double t = v.start + static_cast<double>(j) * config.velocity_obs_interval;
        if (t > last_t) break;
        obs.push_back({t, trace.truth_at(t - v.start) + noise * obs_rng.normal()});
      }
    }
    sc.velocity.emplace(v.id, std::move(obs));
    sc.motions.push_back(std::move(motion));
  }

  std::stable_sort(sc.events.begin(), sc.events.end(), [](const DetectionEvent& a, const DetectionEvent& b) {
    return std::tie(a.t, a.camera, a.plate) < std::tie(b.t, b.camera, b.plate);
  });
  return sc;
}

}  // namespace fusetrack::sim
