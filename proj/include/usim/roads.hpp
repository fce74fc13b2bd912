#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "usim/geo.hpp"

namespace usim::roads {

struct RoadNode {
  std::int64_t id = 0;
  geo::LatLon pos;
};

struct RoadEdge {
  std::int64_t id = 0;
  std::int32_t from = -1, to = -1;  // node positions
  double length_m = 0;
  double walk_speed_mps = 0;   // <= 0: edge closed to the mode
  double drive_speed_mps = 0;
};

enum class Mode { walk, drive };

struct RoadGraph {
  std::vector<RoadNode> nodes;
  std::vector<RoadEdge> edges;
  std::vector<std::vector<std::int32_t>> out_edges;  // node -> edge positions
  std::unordered_map<std::int64_t, std::int32_t> node_ids;

  void finalize();  // adjacency + validation (positive lengths, endpoints exist)
  std::int32_t node_index(std::int64_t id) const;
};

struct RoadPath {
  std::vector<std::int32_t> edge_pos;      // positions into graph.edges
  std::vector<double> entry_offset_s;      // seconds after departure, per edge
  double distance_m = 0;
  double duration_s = 0;
  std::int32_t src_node = -1, dst_node = -1;  // snapped endpoints
};

// nearest node within max_snap_m, ties by node position; throws snap_failure
std::int32_t snap_node(const RoadGraph& graph, geo::LatLon p, const geo::Projection& proj,
                       double max_snap_m = 500);

// Minimal-duration path under the mode's per-edge speeds. Among equal-duration
// paths the lexicographically smallest edge-id sequence wins (shortest-path
// DAG walk, greedy by edge id).
RoadPath road_route(const RoadGraph& graph, geo::LatLon origin, geo::LatLon dest, Mode mode,
                    const geo::Projection& proj, double max_snap_m = 500);

}  // namespace usim::roads
