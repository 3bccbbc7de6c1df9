#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fusetrack/config.hpp"
#include "fusetrack/tracker.hpp"

namespace fusetrack::bench {

/// Gated and full-scan tracking of one target vehicle.
struct TargetRun {
  std::string target;
  tracker::Trajectory gated;
  tracker::Trajectory full;
  tracker::Metrics gated_metrics;
  tracker::Metrics full_metrics;
};

/// Tracks every target vehicle of a scenario from its first detection.
std::vector<TargetRun> track_targets(const sim::Scenario& scenario, const tracker::TrackConfig& config);

struct BenchRow {
  std::uint64_t seed = 0;
  bool exact_order_gated = false;  ///< every target recovered exactly
  bool exact_order_full = false;
  std::size_t comparisons_gated = 0;
  std::size_t comparisons_full = 0;
  double saved_fraction = 0.0;  ///< 1 - comparisons_gated / comparisons_full
};

BenchRow run_seed(const RunConfig& config, std::uint64_t seed);

/// Seeds first_seed .. first_seed + count - 1, evaluated on worker threads
/// and returned in seed order.
std::vector<BenchRow> run(const RunConfig& config, std::uint64_t first_seed, std::size_t count);

void write_csv(const std::vector<BenchRow>& rows, std::ostream& out);

}  // namespace fusetrack::bench
