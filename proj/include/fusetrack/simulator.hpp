#pragma once

// Deterministic traffic simulator: road network, camera coverage, vehicle
// motion, noisy detections and sparse velocity observations.
//
// All randomness flows from Rng streams keyed by (seed, purpose, vehicle),
// so a (config, seed) pair regenerates the same scenario bit for bit.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fusetrack/appearance.hpp"
#include "fusetrack/kalman.hpp"
#include "fusetrack/rng.hpp"
#include "fusetrack/road_graph.hpp"

namespace fusetrack::sim {

using appearance::AppearanceFeature;
using appearance::VehicleClass;
using kalman::VelocityObservation;

struct StepChange {
  double t = 0.0;      ///< seconds after the profile starts
  double delta = 0.0;  ///< added to the true velocity, m/s
};

/// Clamped Gaussian random walk sampled every `step` seconds.
struct VelocityProfile {
  double v0 = 12.0;
  double q_sim = 0.005;  ///< per-step variance, (m/s)^2
  double v_lo = 3.0;
  double v_hi = 25.0;
  double step = 1.0;
  std::vector<StepChange> steps;

  void validate() const;
};

/// Produces the true velocity samples of a profile one step at a time.
class VelocityWalk {
 public:
  VelocityWalk(const VelocityProfile& profile, Rng& rng);
  /// Sample at time index * step; the first call returns the clamped v0.
  double next();

 private:
  const VelocityProfile& profile_;
  Rng& rng_;
  std::size_t index_ = 0;
  std::size_t next_change_ = 0;
  double current_ = 0.0;
};

struct VelocityTrace {
  double step = 1.0;
  std::vector<double> truth;  ///< truth[k] at t = k * step
  std::vector<VelocityObservation> observations;

  /// Linear interpolation of the true samples.
  double truth_at(double t) const;
};

/// Hidden velocity over [0, horizon] with `obs_count` evenly spaced noisy
/// observations (variance r_sim) that include both endpoints.
VelocityTrace simulate_velocity_trace(const VelocityProfile& profile, double horizon,
                                      std::size_t obs_count, double r_sim, Rng& rng);

/// Evenly spaced observation times over [0, horizon].
std::vector<double> even_times(double horizon, std::size_t count);

struct DetectionEvent {
  std::string camera;
  double t = 0.0;
  AppearanceFeature feature;
  std::string plate;  ///< ground truth; only evaluation may read it

  friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

struct VehicleTemplate {
  std::string id;
  VehicleClass vehicle_class = VehicleClass::Car;
  appearance::Rgb color;
  std::vector<std::string> route;
  double start = 0.0;
  double v0 = 12.0;
  std::optional<std::vector<double>> shape;  ///< drawn from the seed when absent
  bool target = true;
};

struct AppearanceNoise {
  double sigma_hue = 8.0;    ///< degrees, per detection
  double sigma_shape = 0.1;  ///< per descriptor component
  int patch_size = 8;        ///< pixels per side of the rendered colour patch
  double dark_fraction = 0.25;
};

struct GraphSpec {
  std::vector<CameraNode> cameras;
  std::vector<Junction> junctions;
  std::vector<RoadEdge> edges;
};

struct ScenarioConfig {
  GraphSpec graph;
  std::vector<VehicleTemplate> vehicles;
  std::size_t background_vehicles = 0;
  double background_window = 1500.0;  ///< background starts uniform in [0, window]
  std::size_t background_min_cameras = 2;
  std::size_t background_max_cameras = 4;
  double background_v_lo = 8.0;
  double background_v_hi = 16.0;
  double start_jitter = 0.0;  ///< targets start uniformly in [start, start + jitter]

  double horizon = 4000.0;
  double v_lo = 3.0;
  double v_hi = 25.0;
  double q_sim = 0.005;
  double velocity_obs_interval = 30.0;
  double r_sim = 1.0;

  AppearanceNoise noise;
  appearance::HistogramConfig histogram;
  std::size_t shape_dim = 8;

  void validate() const;
};

/// Five cameras A-E on a 2 km square with roads A-B, B-D, B-C, C-E and A-C.
/// Targets: a red truck D-B-A, b blue car E-C-B-D, c white bus A-C-E and
/// d yellow motorbike D-B-C-E, plus background traffic.
ScenarioConfig fig6_preset();
GraphSpec fig6_graph();

struct VehicleSpec {
  std::string id;
  VehicleClass vehicle_class = VehicleClass::Car;
  appearance::Rgb color;
  std::vector<double> shape;
  std::vector<std::string> route;
  double start = 0.0;
  VelocityProfile profile;
  bool target = false;
};

/// Sampled motion of one vehicle: speed[k] at start + k * step.
struct VehicleMotion {
  double start = 0.0;
  double step = 1.0;
  double s0 = 0.0;  ///< route coordinate at start (negative: before first node)
  std::vector<double> speed;
  std::vector<double> coordinate;  ///< route coordinate at each sample
  std::vector<double> node_coordinates;  ///< route coordinate of each route node

  /// Route coordinate at time t (piecewise-quadratic, exact for the samples).
  double position_at(double t) const;
};

struct Scenario {
  RoadGraph graph;
  std::vector<VehicleSpec> vehicles;
  std::vector<VehicleMotion> motions;  ///< parallel to vehicles
  std::vector<DetectionEvent> events;  ///< sorted by (t, camera, plate)
  std::map<std::string, std::vector<VelocityObservation>> velocity;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  appearance::HistogramConfig histogram;

  const VehicleSpec* vehicle(const std::string& id) const;
  /// Camera passages of a vehicle in time order, from the event log.
  std::vector<std::size_t> passages_of(const std::string& id) const;
};

/// Throws ConfigError for a malformed graph, a route through non-adjacent
/// nodes, or out-of-range parameters.
Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// Noisy detection of a vehicle's appearance.
AppearanceFeature observe_appearance(const VehicleSpec& vehicle, const AppearanceNoise& noise,
                                     const appearance::HistogramConfig& cfg, Rng& rng);

}  // namespace fusetrack::sim
