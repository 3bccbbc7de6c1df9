#pragma once

// Run configuration, read from a JSON document. Unknown keys are errors.
//
//   {
//     "seed": 7,
//     "scenario": {"preset": "fig6", "background_vehicles": 80, ...},
//     "kalman": {"p0_position": 100, "p0_velocity": 25, "q": 0.1, "r": 4, "v0": 12},
//     "appearance": {"h_bins": 16, "s_bins": 4, "v_bins": 4, "w_color": 0.5,
//                    "metric": "intersection", "sigma_hue": 8, "sigma_shape": 0.1},
//     "gating": {"tau": 0.05, "v_min": 1, "sigma2_floor": 4},
//     "tracker": {"theta_sim": 0.6, "max_hops": 16}
//   }

#include <cstdint>
#include <string>

#include "fusetrack/simulator.hpp"
#include "fusetrack/tracker.hpp"

namespace fusetrack {

struct RunConfig {
  std::uint64_t seed = 1;
  std::string preset = "fig6";  ///< "fig6" or "custom"
  sim::ScenarioConfig scenario = sim::fig6_preset();
  tracker::TrackConfig tracking;

  /// Histogram layout shared by the simulator and the event-log reader.
  const appearance::HistogramConfig& histogram() const { return scenario.histogram; }
  void validate() const;
};

/// Throws ParseError (with line and column) for malformed JSON and
/// ConfigError for unknown keys, wrong types or out-of-range values.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

sim::ScenarioConfig preset_by_name(const std::string& name);

}  // namespace fusetrack
