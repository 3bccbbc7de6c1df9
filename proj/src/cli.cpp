#include "fusetrack/cli.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "fusetrack/bench.hpp"
#include "fusetrack/config.hpp"
#include "fusetrack/error.hpp"
#include "fusetrack/io.hpp"

namespace fusetrack::cli {
namespace {

namespace fs = std::filesystem;

void setup_logging() {
  static bool done = false;
  if (done) return;
  done = true;
  auto logger = spdlog::stderr_logger_st("fusetrack");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("FUSETRACK_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

// Options shared by the subcommands.
struct Common {
  std::string config_path;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<double> gate_threshold;
  std::string out = "-";
};

struct QuerySpec {
  std::optional<std::size_t> index;
  std::string plate;
  std::string json;
};

RunConfig resolve_config(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_run_config(c.config_path);
  if (!c.scenario.empty()) {
    auto scenario = preset_by_name(c.scenario);
    scenario.histogram = cfg.scenario.histogram;
    scenario.noise = cfg.scenario.noise;
    cfg.scenario = std::move(scenario);
    cfg.preset = c.scenario;
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.gate_threshold) cfg.tracking.gate.tau = *c.gate_threshold;
  cfg.validate();
  return cfg;
}

std::vector<sim::DetectionEvent> load_log(const std::string& path, const appearance::HistogramConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open event log '" + path + "'");
  return io::read_event_log(in, cfg);
}

// Writes through a sibling temporary so a failure never leaves a partial file.
// Devices and pipes are written in place.
template <typename Fn>
void write_atomically(const fs::path& target, Fn&& fn) {
  std::error_code status_ec;
  const auto status = fs::status(target, status_ec);
  if (fs::exists(status) && !fs::is_regular_file(status)) {
    std::ofstream out(target, std::ios::binary);
    if (!out) throw IoError("cannot open '" + target.string() + "' for writing");
    fn(out);
    out.flush();
    if (!out) throw IoError("failed writing '" + target.string() + "'");
    return;
  }
  fs::path tmp = target;
  tmp += ".tmp";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
      fn(out);
      out.close();
      if (!out) throw IoError("failed writing '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

template <typename Fn>
void write_output(const std::string& path, std::ostream& stdout_stream, Fn&& fn) {
  if (path == "-") {
    fn(stdout_stream);
  } else {
    write_atomically(path, fn);
  }
}

tracker::Query resolve_query(const QuerySpec& q, const std::vector<sim::DetectionEvent>& log,
                             const appearance::HistogramConfig& cfg) {
  if (q.index) return tracker::Query::from_event(log, *q.index);
  if (!q.plate.empty()) {
    for (std::size_t i = 0; i < log.size(); ++i) {
      if (log[i].plate == q.plate) return tracker::Query::from_event(log, i);
    }
    throw InvalidArgument("no detection with plate '" + q.plate + "' in the event log");
  }
  std::istringstream rec(q.json);
  const auto parsed = io::read_event_log(rec, cfg);
  if (parsed.size() != 1) throw ParseError("--query-json must hold exactly one event record", 1);
  return tracker::Query{parsed.front().feature, parsed.front().camera, parsed.front().t, std::nullopt};
}

std::string describe(const tracker::Query& q) {
  std::ostringstream s;
  s << appearance::to_string(q.vehicle_class()) << " at " << q.origin_camera << " t=" << io::format_number(q.origin_time);
  if (q.event) s << " (event " << *q.event << ")";
  return s.str();
}

int cmd_simulate(const Common& c, std::ostream& out) {
  const RunConfig cfg = resolve_config(c);
  if (c.out == "-") throw InvalidArgument("simulate needs --out DIR");
  const auto scenario = sim::generate_scenario(cfg.scenario, cfg.seed);

  const fs::path dir(c.out);
  fs::create_directories(dir);
  std::size_t count = 0;
  write_atomically(dir / "events.jsonl", [&](std::ostream& os) { count = io::emit_event_log(scenario, os); });
  write_atomically(dir / "scenario.json", [&](std::ostream& os) { io::write_scenario(scenario, os); });
  out << count << " records written to " << (dir / "events.jsonl").string() << '\n';
  spdlog::info("seed {} vehicles {} events {}", cfg.seed, scenario.vehicles.size(), count);
  return kOk;
}

int cmd_track(const Common& c, const std::string& log_path, const std::string& world_path, const QuerySpec& qs,
              bool no_gate, std::ostream& out, std::ostream& err) {
  RunConfig cfg = resolve_config(c);
  const auto log = load_log(log_path, cfg.histogram());
  for (std::size_t i = 1; i < log.size(); ++i) {
    if (log[i].t < log[i - 1].t) throw ParseError("event log is not time-sorted", i + 1);
  }

  std::optional<sim::Scenario> world;
  if (!world_path.empty()) {
    std::ifstream in(world_path);
    if (!in) throw IoError("cannot open scenario file '" + world_path + "'");
    world = io::read_scenario(in);
  }
  const RoadGraph graph = world ? world->graph
                                : RoadGraph(cfg.scenario.graph.cameras, cfg.scenario.graph.junctions,
                                            cfg.scenario.graph.edges);

  const tracker::Query query = resolve_query(qs, log, cfg.histogram());
  if (!graph.camera(query.origin_camera)) {
    throw InvalidArgument("unknown camera '" + query.origin_camera + "'");
  }

  // Motion-sensor readings for the queried vehicle, when the scenario has them.
  std::vector<kalman::VelocityObservation> velocity;
  std::string vehicle = qs.plate;
  if (vehicle.empty() && query.event) vehicle = log[*query.event].plate;
  if (world && !vehicle.empty()) {
    if (const auto it = world->velocity.find(vehicle); it != world->velocity.end()) velocity = it->second;
  }
  if (velocity.empty()) spdlog::warn("no velocity observations for the query; gating uses the prior velocity");

  cfg.tracking.gated = !no_gate;
  const auto started = std::chrono::steady_clock::now();
  const auto traj = tracker::track(query, log, graph, velocity, cfg.tracking);
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();

  for (const auto& hop : traj.hops) {
    for (const auto& g : hop.gates) {
      if (g.params.all_pass && !no_gate) {
        spdlog::info("all-pass gate at {} -> {}: velocity below v_min, precision degraded", hop.from_camera, g.camera);
      }
    }
  }

  io::ExportInfo info{no_gate ? "full-scan" : "gated", describe(query)};
  write_output(c.out, out, [&](std::ostream& os) { io::write_trajectory_geojson(traj, graph, info, os); });

  std::ostream& report = c.out == "-" ? err : out;
  report << "mode " << info.mode << "\n";
  report << "trajectory";
  for (const auto& v : traj.visits) report << ' ' << v.camera;
  report << "\ncomparisons " << traj.comparisons() << " of " << traj.candidates() << " candidates\n";
  report << "survivors per hop";
  for (const auto& h : traj.hops) report << ' ' << h.comparisons;
  report << "\nwall time " << std::fixed << std::setprecision(3) << wall_ms << " ms\n" << std::defaultfloat;
  if (world && !vehicle.empty() && world->vehicle(vehicle)) {
    world->events = log;
    const auto m = tracker::evaluate(traj, *world, vehicle);
    report << "exact order " << (m.exact_order ? "true" : "false") << "\nprecision "
           << (m.precision ? io::format_number(*m.precision) : std::string("n/a")) << '\n';
  }
  return kOk;
}

int cmd_retrieve(const Common& c, const std::string& log_path, const QuerySpec& qs, std::size_t k, std::ostream& out) {
  const RunConfig cfg = resolve_config(c);
  const auto log = load_log(log_path, cfg.histogram());
  const tracker::Query query = resolve_query(qs, log, cfg.histogram());

  std::vector<appearance::AppearanceFeature> features;
  std::vector<std::size_t> refs;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (query.event && *query.event == i) continue;
    features.push_back(log[i].feature);
    refs.push_back(i);
  }
  const auto ranked = appearance::top_k(query.feature, features, k, cfg.tracking.match);
  out << "rank\tevent\tcamera\tt\tclass\tdistance\tplate\n";
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const auto& e = log[refs[ranked[r].index]];
    out << r + 1 << '\t' << refs[ranked[r].index] << '\t' << e.camera << '\t' << io::format_number(e.t) << '\t'
        << appearance::to_string(e.feature.vehicle_class) << '\t' << io::format_number(ranked[r].distance) << '\t'
        << (e.plate.empty() ? "-" : e.plate) << '\n';
  }
  return kOk;
}

int cmd_bench(const Common& c, std::size_t seeds, std::ostream& out) {
  const RunConfig cfg = resolve_config(c);
  const auto rows = bench::run(cfg, cfg.seed, seeds);
  write_output(c.out, out, [&](std::ostream& os) { bench::write_csv(rows, os); });
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  setup_logging();

  CLI::App app{"Multi-camera vehicle tracking with velocity-gated appearance matching", "fusetrack"};
  app.require_subcommand(1);

  Common common;
  QuerySpec query;
  std::string log_path, world_path;
  bool no_gate = false;
  std::size_t k = 20;
  std::size_t seeds = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "run configuration (JSON)");
    sub->add_option("--scenario", common.scenario, "scenario preset (fig6)");
    sub->add_option("--seed", common.seed, "random seed");
  };
  auto add_query = [&](CLI::App* sub) {
    auto* idx = sub->add_option("--query", query.index, "query by event-log index");
    auto* plate = sub->add_option("--query-plate", query.plate, "query by first detection with this plate");
    auto* rec = sub->add_option("--query-json", query.json, "query by a raw event record");
    idx->excludes(plate, rec);
    plate->excludes(rec);
  };

  auto* simulate = app.add_subcommand("simulate", "generate a scenario and its event log");
  add_common(simulate);
  simulate->add_option("--out", common.out, "output directory")->required();

  auto* track = app.add_subcommand("track", "reconstruct a trajectory from an event log");
  add_common(track);
  add_query(track);
  track->add_option("--log", log_path, "event log (JSON lines)")->required();
  track->add_option("--world", world_path, "scenario file with graph and velocity readings");
  track->add_option("--gate-threshold", common.gate_threshold, "gate tau in (0, 1]");
  track->add_flag("--no-gate", no_gate, "compare against every candidate");
  track->add_option("--out", common.out, "trajectory GeoJSON (- for stdout)");

  auto* retrieve = app.add_subcommand("retrieve", "rank the most similar detections");
  add_common(retrieve);
  add_query(retrieve);
  retrieve->add_option("--log", log_path, "event log (JSON lines)")->required();
  retrieve->add_option("-k", k, "number of results");

  auto* bench_cmd = app.add_subcommand("bench", "compare gated and full-scan tracking over seeds");
  add_common(bench_cmd);
  bench_cmd->add_option("--seeds", seeds, "number of seeds")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--gate-threshold", common.gate_threshold, "gate tau in (0, 1]");
  bench_cmd->add_option("--out", common.out, "CSV report (- for stdout)");

  std::vector<std::string> argv_store{"fusetrack"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  const bool has_query = query.index || !query.plate.empty() || !query.json.empty();
  if ((track->parsed() || retrieve->parsed()) && !has_query) {
    err << "usage error: one of --query, --query-plate or --query-json is required\n";
    return kUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(common, out);
    if (track->parsed()) return cmd_track(common, log_path, world_path, query, no_gate, out, err);
    if (retrieve->parsed()) return cmd_retrieve(common, log_path, query, k, out);
    return cmd_bench(common, seeds, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kInputParse;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kInputParse;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

}  // namespace fusetrack::cli
