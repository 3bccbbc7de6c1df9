#include "fusetrack/road_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "fusetrack/error.hpp"

namespace fusetrack {
namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

RoadGraph::RoadGraph(std::vector<CameraNode> cameras, std::vector<Junction> junctions,
                     std::vector<RoadEdge> edges)
    : cameras_(std::move(cameras)), junctions_(std::move(junctions)), edges_(std::move(edges)) {
  for (const auto& c : cameras_) {
    if (c.id.empty()) throw ConfigError("camera id must not be empty");
    if (!(c.radius > 0.0)) throw ConfigError("camera " + c.id + ": coverage radius must be > 0");
    if (index_of(c.id)) throw ConfigError("duplicate node id '" + c.id + "'");
    ids_.push_back(c.id);
    positions_.push_back({c.x, c.y});
  }
  for (const auto& j : junctions_) {
    if (j.id.empty()) throw ConfigError("junction id must not be empty");
    if (index_of(j.id)) throw ConfigError("duplicate node id '" + j.id + "'");
    ids_.push_back(j.id);
    positions_.push_back({j.x, j.y});
  }

  const std::size_t n = ids_.size();
  adjacency_.resize(n);
  for (const auto& e : edges_) {
    const auto a = index_of(e.a);
    const auto b = index_of(e.b);
    if (!a || !b) throw ConfigError("edge " + e.a + "-" + e.b + " references an unknown node");
    if (*a == *b) throw ConfigError("edge " + e.a + "-" + e.b + " is a self loop");
    if (!(e.length > 0.0) || !std::isfinite(e.length)) {
      throw ConfigError("edge " + e.a + "-" + e.b + ": length must be > 0");
    }
    const double straight = std::hypot(positions_[*a].x - positions_[*b].x,
                                       positions_[*a].y - positions_[*b].y);
    if (e.length < straight * (1.0 - 1e-9)) {
      throw ConfigError("edge " + e.a + "-" + e.b + " is shorter than the straight line between its nodes");
    }
    adjacency_[*a].push_back({*b, e.length});
    adjacency_[*b].push_back({*a, e.length});
  }

  // Dijkstra from every node; graphs here are small.
  dist_.assign(n * n, kInf);
  for (std::size_t src = 0; src < n; ++src) {
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    double* row = &dist_[src * n];
    row[src] = 0.0;
    open.push({0.0, src});
    while (!open.empty()) {
      auto [d, u] = open.top();
      open.pop();
      if (d > row[u]) continue;
      for (auto [v, w] : adjacency_[u]) {
        if (d + w < row[v]) {
          row[v] = d + w;
          open.push({row[v], v});
        }
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (row[v] == kInf) throw ConfigError("road graph is disconnected: " + ids_[src] + " cannot reach " + ids_[v]);
    }
  }
}

std::optional<std::size_t> RoadGraph::index_of(std::string_view id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

std::size_t RoadGraph::require(std::string_view id) const {
  const auto idx = index_of(id);
  if (!idx) throw InvalidArgument("unknown road node '" + std::string(id) + "'");
  return *idx;
}

const CameraNode* RoadGraph::camera(std::string_view id) const {
  for (const auto& c : cameras_) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

Point RoadGraph::position(std::string_view id) const { return positions_[require(id)]; }

std::optional<double> RoadGraph::edge_length(std::string_view a, std::string_view b) const {
  const std::size_t ia = require(a);
  const std::size_t ib = require(b);
  std::optional<double> best;
  for (auto [v, w] : adjacency_[ia]) {
    if (v == ib && (!best || w < *best)) best = w;
  }
  return best;
}

double RoadGraph::distance(std::string_view a, std::string_view b) const {
  return dist_[require(a) * ids_.size() + require(b)];
}

std::vector<std::string> RoadGraph::neighbouring_cameras(std::string_view camera_id) const {
  const std::size_t src = require(camera_id);
  if (src >= cameras_.size()) throw InvalidArgument("'" + std::string(camera_id) + "' is not a camera");

  std::vector<bool> seen(ids_.size(), false);
  std::vector<std::size_t> stack{src};
  seen[src] = true;
  std::vector<std::string> out;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (auto [v, w] : adjacency_[u]) {
      if (seen[v]) continue;
      seen[v] = true;
      if (v < cameras_.size()) {
        out.push_back(ids_[v]);
      } else {
        stack.push_back(v);  // junctions are transparent
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool RoadGraph::cameras_adjacent(std::string_view a, std::string_view b) const {
  const auto n = neighbouring_cameras(a);
  return std::find(n.begin(), n.end(), b) != n.end();
}

}  // namespace fusetrack
