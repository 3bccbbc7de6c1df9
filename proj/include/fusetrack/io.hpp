#pragma once

// File formats.
//
// Event log: one JSON object per line,
//   {"camera":"B","t":212.40,"class":"truck","shape":[...],"hist":[...],"plate":"a"}
// with "plate" optional. Decimals use shortest round-trip formatting.
//
// Scenario file: one JSON document with the road graph, vehicle specs and
// per-vehicle velocity observations.
//
// Trajectory export: a GeoJSON FeatureCollection in the scenario's planar
// metre coordinates: one Point per visit and a LineString for the path.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fusetrack/simulator.hpp"
#include "fusetrack/tracker.hpp"

namespace fusetrack::io {

/// Serializes one event as a single line without the trailing newline.
std::string format_event(const sim::DetectionEvent& event);

/// Writes one line per event. Throws IoError (with the number of complete
/// records) if the sink fails.
std::size_t write_event_log(std::span<const sim::DetectionEvent> events, std::ostream& out);

/// Writes the scenario's detections in the event-log format.
std::size_t emit_event_log(const sim::Scenario& scenario, std::ostream& out);

/// Parses an event log. Blank lines are skipped. Throws ParseError with the
/// offending line (and column for JSON syntax errors). Histograms must match
/// `cfg` in length and sum to 1 within 1e-9; shape length must be the same on
/// every line.
std::vector<sim::DetectionEvent> read_event_log(std::istream& in, const appearance::HistogramConfig& cfg);

void write_scenario(const sim::Scenario& scenario, std::ostream& out);

/// Reads a scenario file. Events and motions are left empty.
sim::Scenario read_scenario(std::istream& in);

struct ExportInfo {
  std::string mode = "gated";
  std::string query;  ///< free-form description of the query
};

void write_trajectory_geojson(const tracker::Trajectory& trajectory, const RoadGraph& graph,
                              const ExportInfo& info, std::ostream& out);

/// Shortest round-trip decimal for a double.
std::string format_number(double value);

}  // namespace fusetrack::io
