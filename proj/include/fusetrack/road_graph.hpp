#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fusetrack {

struct CameraNode {
  std::string id;
  double x = 0.0, y = 0.0;  // metres, planar
  double radius = 30.0;     // coverage radius, metres
};

struct Junction {
  std::string id;
  double x = 0.0, y = 0.0;
};

struct RoadEdge {
  std::string a, b;
  double length = 0.0;  // metres along the road
};

struct Point {
  double x = 0.0, y = 0.0;
};

/// Undirected road network whose nodes are cameras and plain junctions.
/// Immutable after construction; all-pairs distances are precomputed.
class RoadGraph {
 public:
  RoadGraph() = default;

  /// Throws ConfigError on duplicate ids, unknown edge endpoints, non-positive
  /// lengths, an edge shorter than the straight line between its endpoints,
  /// or a disconnected graph.
  RoadGraph(std::vector<CameraNode> cameras, std::vector<Junction> junctions,
            std::vector<RoadEdge> edges);

  const std::vector<CameraNode>& cameras() const { return cameras_; }
  const std::vector<Junction>& junctions() const { return junctions_; }
  const std::vector<RoadEdge>& edges() const { return edges_; }

  bool has_node(std::string_view id) const { return index_of(id).has_value(); }
  const CameraNode* camera(std::string_view id) const;
  Point position(std::string_view id) const;

  /// Length of the direct edge between a and b, if any.
  std::optional<double> edge_length(std::string_view a, std::string_view b) const;

  /// Shortest road distance. Throws InvalidArgument for unknown nodes.
  double distance(std::string_view a, std::string_view b) const;

  /// Cameras reachable from `camera_id` without passing another camera,
  /// sorted by id.
  std::vector<std::string> neighbouring_cameras(std::string_view camera_id) const;
  bool cameras_adjacent(std::string_view a, std::string_view b) const;

 private:
  std::optional<std::size_t> index_of(std::string_view id) const;
  std::size_t require(std::string_view id) const;

  std::vector<CameraNode> cameras_;
  std::vector<Junction> junctions_;
  std::vector<RoadEdge> edges_;
  std::vector<std::string> ids_;  // cameras first, then junctions
  std::vector<Point> positions_;
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;
  std::vector<double> dist_;  // row-major all-pairs
};

}  // namespace fusetrack
