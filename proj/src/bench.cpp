#include "fusetrack/bench.hpp"

#include <algorithm>
#include <atomic>
#include <ostream>
#include <thread>

#include "fusetrack/io.hpp"

namespace fusetrack::bench {

std::vector<TargetRun> track_targets(const sim::Scenario& scenario, const tracker::TrackConfig& config) {
  std::vector<TargetRun> runs;
  for (const auto& v : scenario.vehicles) {
    if (!v.target) continue;
    const auto passages = scenario.passages_of(v.id);
    if (passages.empty()) continue;

    const auto query = tracker::Query::from_event(scenario.events, passages.front());
    const auto& velocity = scenario.velocity.at(v.id);
    TargetRun run;
    run.target = v.id;

    tracker::TrackConfig cfg = config;
    cfg.gated = true;
    run.gated = tracker::track(query, scenario.events, scenario.graph, velocity, cfg);
    cfg.gated = false;
    run.full = tracker::track(query, scenario.events, scenario.graph, velocity, cfg);
    run.gated_metrics = tracker::evaluate(run.gated, scenario, v.id);
    run.full_metrics = tracker::evaluate(run.full, scenario, v.id);
    runs.push_back(std::move(run));
  }
  return runs;
}

BenchRow run_seed(const RunConfig& config, std::uint64_t seed) {
  const auto scenario = sim::generate_scenario(config.scenario, seed);
  BenchRow row;
  row.seed = seed;
  row.exact_order_gated = true;
  row.exact_order_full = true;
  for (const auto& r : track_targets(scenario, config.tracking)) {
    row.exact_order_gated = row.exact_order_gated && r.gated_metrics.exact_order;
    row.exact_order_full = row.exact_order_full && r.full_metrics.exact_order;
    row.comparisons_gated += r.gated_metrics.comparisons;
    row.comparisons_full += r.full_metrics.comparisons;
  }
  row.saved_fraction = row.comparisons_full == 0
                           ? 0.0
                           : 1.0 - static_cast<double>(row.comparisons_gated) / static_cast<double>(row.comparisons_full);
  return row;
}

std::vector<BenchRow> run(const RunConfig& config, std::uint64_t first_seed, std::size_t count) {
  std::vector<BenchRow> rows(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) rows[i] = run_seed(config, first_seed + i);
  };
  const std::size_t threads = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(count, 1));
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  return rows;
}

void write_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "seed,exact_order_gated,exact_order_full,comparisons_gated,comparisons_full,saved_fraction\n";
  for (const auto& r : rows) {
    out << r.seed << ',' << (r.exact_order_gated ? "true" : "false") << ','
        << (r.exact_order_full ? "true" : "false") << ',' << r.comparisons_gated << ',' << r.comparisons_full << ','
        << io::format_number(r.saved_fraction) << '\n';
  }
}

}  // namespace fusetrack::bench
