#pragma once

// Cross-camera tracking: velocity estimate -> temporal gate per neighbouring
// camera -> appearance match among survivors -> next visit.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fusetrack/appearance.hpp"
#include "fusetrack/gating.hpp"
#include "fusetrack/kalman.hpp"
#include "fusetrack/road_graph.hpp"
#include "fusetrack/simulator.hpp"

namespace fusetrack::tracker {

using appearance::AppearanceFeature;
using sim::DetectionEvent;

struct Query {
  AppearanceFeature feature;
  std::string origin_camera;
  double origin_time = 0.0;
  std::optional<std::size_t> event;  ///< log index when the query is a detection

  appearance::VehicleClass vehicle_class() const { return feature.vehicle_class; }

  static Query from_event(std::span<const DetectionEvent> log, std::size_t index);
};

struct TrackConfig {
  double theta_sim = 0.6;      ///< minimum confidence to accept a match
  std::size_t max_hops = 16;
  bool gated = true;           ///< false: full scan of every candidate camera
  gating::GateSettings gate;
  appearance::MatchOptions match;
  kalman::FilterDefaults kalman;

  void validate() const;
};

struct Visit {
  std::string camera;
  double t = 0.0;
  std::optional<std::size_t> event;
  double confidence = 1.0;
  std::size_t survivors = 0;   ///< candidates left by the gate at this hop
  std::size_t candidates = 0;  ///< same-class candidates before gating
  bool gap = false;            ///< previous camera is not a road neighbour
};

struct CameraGate {
  std::string camera;
  gating::GateParams params;
  std::size_t candidates = 0;
  std::size_t survivors = 0;
};

/// One search step, kept whether or not it produced a visit.
struct HopSearch {
  std::string from_camera;
  double from_time = 0.0;
  std::vector<CameraGate> gates;
  std::vector<std::size_t> survivors;  ///< log indices, all cameras
  std::size_t candidates = 0;
  std::size_t comparisons = 0;
  std::optional<std::size_t> best;  ///< log index of the best match
  double best_distance = 1.0;
  bool accepted = false;
};

struct Trajectory {
  std::vector<Visit> visits;
  std::vector<HopSearch> hops;

  std::size_t comparisons() const;
  std::size_t candidates() const;
};

/// Where the tracker currently stands.
struct Cursor {
  std::string camera;
  double t = 0.0;
  double route_coordinate = 0.0;
};

class Tracker {
 public:
  /// `log` must be time-sorted; it and `velocity` must outlive the tracker.
  Tracker(const RoadGraph& graph, std::span<const DetectionEvent> log,
          std::span<const kalman::VelocityObservation> velocity, TrackConfig config);

  Trajectory track(const Query& query) const;

  /// Velocity estimate at the cursor from all observations up to its time.
  kalman::StateEstimate estimate_at(const Cursor& at) const;

  /// Best candidate among the neighbouring cameras of `at`.
  HopSearch search(const Cursor& at, const AppearanceFeature& reference, bool gated) const;

  const TrackConfig& config() const { return config_; }

 private:
  const RoadGraph& graph_;
  std::span<const DetectionEvent> log_;
  std::span<const kalman::VelocityObservation> velocity_;
  TrackConfig config_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_camera_;
};

Trajectory track(const Query& query, std::span<const DetectionEvent> log, const RoadGraph& graph,
                 std::span<const kalman::VelocityObservation> velocity, const TrackConfig& config);

struct Metrics {
  bool exact_order = false;
  std::optional<double> precision;  ///< empty when no hop was matched
  std::size_t matched_hops = 0;
  std::size_t correct_hops = 0;
  std::size_t comparisons = 0;
  std::size_t candidates = 0;
  double saved_fraction = 0.0;  ///< 1 - comparisons / candidates
};

/// Scores a trajectory against the plate ids of the scenario's event log.
Metrics evaluate(const Trajectory& trajectory, const sim::Scenario& scenario, const std::string& target);

}  // namespace fusetrack::tracker
