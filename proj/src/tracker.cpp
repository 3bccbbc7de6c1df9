#include "fusetrack/tracker.hpp"

#include <algorithm>
#include <tuple>

#include "fusetrack/error.hpp"

namespace fusetrack::tracker {

Query Query::from_event(std::span<const DetectionEvent> log, std::size_t index) {
  if (index >= log.size()) throw InvalidArgument("query event index out of range");
  const DetectionEvent& e = log[index];
  return Query{e.feature, e.camera, e.t, index};
}

void TrackConfig::validate() const {
  if (!(theta_sim > 0.0 && theta_sim <= 1.0)) throw InvalidArgument("theta_sim must lie in (0, 1]");
  if (max_hops < 1) throw InvalidArgument("max_hops must be >= 1");
  if (!(match.w_color >= 0.0 && match.w_color <= 1.0)) throw InvalidArgument("w_color must lie in [0, 1]");
  gate.validate();
}

std::size_t Trajectory::comparisons() const {
  std::size_t n = 0;
  for (const auto& h : hops) n += h.comparisons;
  return n;
}

std::size_t Trajectory::candidates() const {
  std::size_t n = 0;
  for (const auto& h : hops) n += h.candidates;
  return n;
}

Tracker::Tracker(const RoadGraph& graph, std::span<const DetectionEvent> log,
                 std::span<const kalman::VelocityObservation> velocity, TrackConfig config)
    : graph_(graph), log_(log), velocity_(velocity), config_(std::move(config)) {
  config_.validate();
  for (std::size_t i = 0; i < log_.size(); ++i) {
    if (i > 0 && log_[i].t < log_[i - 1].t) {
      throw InvalidArgument("event log is not time-sorted at record " + std::to_string(i));
    }
    by_camera_[log_[i].camera].push_back(i);
  }
}

kalman::StateEstimate Tracker::estimate_at(const Cursor& at) const {
  const auto end = std::upper_bound(velocity_.begin(), velocity_.end(), at.t,
                                    [](double t, const kalman::VelocityObservation& o) { return t < o.t; });
  const std::span<const kalman::VelocityObservation> causal(velocity_.begin(), end);

  kalman::StateEstimate est;
  if (causal.empty()) {
    est = config_.kalman.initial(at.t);
  } else {
    const kalman::ProcessModel process{config_.kalman.q};
    const kalman::ObservationModel obs{kalman::Row2(0.0, 1.0), config_.kalman.r};
    est = kalman::run_filter(config_.kalman.initial(causal.front().t), causal, process, obs).back();
    if (at.t > est.t) {
      est = kalman::predict(est, process.over(at.t - est.t));
      est.t = at.t;
    }
  }
  est.x(0) = at.route_coordinate;
  return est;
}

HopSearch Tracker::search(const Cursor& at, const AppearanceFeature& reference, bool gated) const {
  const CameraNode* here = graph_.camera(at.camera);
  if (!here) throw InvalidArgument("'" + at.camera + "' is not a camera of the road graph");

  HopSearch hop;
  hop.from_camera = at.camera;
  hop.from_time = at.t;

  std::optional<kalman::StateEstimate> est;
  if (gated) est = estimate_at(at);

  struct Best {
    double distance;
    double t;
    std::string camera;
    std::size_t event;
  };
  std::optional<Best> best;

  for (const std::string& next : graph_.neighbouring_cameras(at.camera)) {
    const CameraNode* cam = graph_.camera(next);

    // Same-class detections at this camera strictly after the cursor.
    std::vector<AppearanceFeature> features;
    std::vector<gating::CandidateMeta> meta;
    std::vector<double> times;
    if (const auto it = by_camera_.find(next); it != by_camera_.end()) {
      for (std::size_t idx : it->second) {
        const DetectionEvent& e = log_[idx];
        if (e.t <= at.t || e.feature.vehicle_class != reference.vehicle_class) continue;
        features.push_back(e.feature);
        meta.push_back({e.camera, e.t, idx});
        times.push_back(e.t);
      }
    }

    CameraGate gate;
    gate.camera = next;
    gate.candidates = features.size();
    gating::GateFilter filter;
    if (gated) {
      const double distance = std::max(0.0, graph_.distance(at.camera, next) + here->radius - cam->radius);
      gate.params = gating::predict_arrival(*est, distance, config_.gate);
      filter = gating::build_filter(gate.params, times);
    } else {
      gate.params = gating::GateParams::pass_all(at.t, config_.gate.tau);
      filter = gating::GateFilter::pass_all(features.size());
    }

    const auto matrix = gating::CandidateMatrix::from_features(features, std::move(meta));
    const auto filtered = gating::apply_filter(filter, matrix);
    const auto matches = gating::gated_top_k(reference, filtered, features, 1, config_.match);

    gate.survivors = filtered.survivors.size();
    hop.candidates += gate.candidates;
    hop.comparisons += matches.comparisons;
    for (std::size_t j : filtered.survivors) hop.survivors.push_back(filtered.meta[j].ref);
    hop.gates.push_back(std::move(gate));

    if (matches.ranked.empty()) continue;
    const auto& top = matches.ranked.front();
    const auto& m = filtered.meta[top.index];
    Best cand{top.distance, m.t, next, m.ref};
    if (!best || std::tie(cand.distance, cand.t, cand.camera) < std::tie(best->distance, best->t, best->camera)) {
      best = std::move(cand);
    }
  }

  std::sort(hop.survivors.begin(), hop.survivors.end());
  if (best) {
    hop.best = best->event;
    hop.best_distance = best->distance;
    hop.accepted = 1.0 - best->distance >= config_.theta_sim;
  }
  return hop;
}

Trajectory Tracker::track(const Query& query) const {
  if (!graph_.camera(query.origin_camera)) {
    throw InvalidArgument("query origin camera '" + query.origin_camera + "' is not in the road graph");
  }
  Trajectory traj;
  traj.visits.push_back(Visit{query.origin_camera, query.origin_time, query.event, 1.0, 0, 0, false});

  Cursor at{query.origin_camera, query.origin_time, 0.0};
  for (std::size_t hop = 0; hop < config_.max_hops; ++hop) {
    HopSearch found = search(at, query.feature, config_.gated);
    const bool accepted = found.accepted;
    if (accepted) {
      const DetectionEvent& e = log_[*found.best];
      Visit v;
      v.camera = e.camera;
      v.t = e.t;
      v.event = found.best;
      v.confidence = 1.0 - found.best_distance;
      v.survivors = found.comparisons;
      v.candidates = found.candidates;
      v.gap = !graph_.cameras_adjacent(at.camera, e.camera);
      at = Cursor{e.camera, e.t, at.route_coordinate + graph_.distance(at.camera, e.camera)};
      traj.visits.push_back(std::move(v));
    }
    traj.hops.push_back(std::move(found));
    if (!accepted) break;
  }
  return traj;
}

Trajectory track(const Query& query, std::span<const DetectionEvent> log, const RoadGraph& graph,
                 std::span<const kalman::VelocityObservation> velocity, const TrackConfig& config) {
  return Tracker(graph, log, velocity, config).track(query);
}

Metrics evaluate(const Trajectory& trajectory, const sim::Scenario& scenario, const std::string& target) {
  if (!scenario.vehicle(target)) throw InvalidArgument("unknown target vehicle '" + target + "'");
  Metrics m;
  const double origin = trajectory.visits.empty() ? 0.0 : trajectory.visits.front().t;

  std::vector<std::string> truth;
  for (std::size_t idx : scenario.passages_of(target)) {
    if (scenario.events[idx].t >= origin) truth.push_back(scenario.events[idx].camera);
  }
  std::vector<std::string> visited;
  for (const auto& v : trajectory.visits) visited.push_back(v.camera);
  m.exact_order = visited == truth;

  for (std::size_t i = 1; i < trajectory.visits.size(); ++i) {
    const auto& v = trajectory.visits[i];
    ++m.matched_hops;
    if (v.event && *v.event < scenario.events.size() && scenario.events[*v.event].plate == target) {
      ++m.correct_hops;
    }
  }
  if (m.matched_hops > 0) m.precision = static_cast<double>(m.correct_hops) / static_cast<double>(m.matched_hops);

  m.comparisons = trajectory.comparisons();
  m.candidates = trajectory.candidates();
  m.saved_fraction = m.candidates == 0 ? 0.0 : 1.0 - static_cast<double>(m.comparisons) / static_cast<double>(m.candidates);
  return m;
}

}  // namespace fusetrack::tracker
