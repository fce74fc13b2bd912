#include "usim/roads.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include "usim/error.hpp"

namespace usim::roads {

void RoadGraph::finalize() {
  node_ids.clear();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!node_ids.emplace(nodes[i].id, static_cast<std::int32_t>(i)).second)
      throw_error(errc::invalid_argument, "duplicate road node id " + std::to_string(nodes[i].id));
  }
  out_edges.assign(nodes.size(), {});
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const RoadEdge& edge = edges[e];
    if (edge.from < 0 || edge.from >= static_cast<std::int32_t>(nodes.size()) || edge.to < 0 ||
        edge.to >= static_cast<std::int32_t>(nodes.size()))
      throw_error(errc::invalid_argument, "road edge " + std::to_string(edge.id) +
                                              " references a missing node");
    if (!(edge.length_m > 0))
      throw_error(errc::invalid_argument,
                  "road edge " + std::to_string(edge.id) + " needs positive length");
    out_edges[static_cast<std::size_t>(edge.from)].push_back(static_cast<std::int32_t>(e));
  }
}

std::int32_t RoadGraph::node_index(std::int64_t id) const {
  auto it = node_ids.find(id);
  if (it == node_ids.end())
    throw_error(errc::invalid_argument, "unknown road node id " + std::to_string(id));
  return it->second;
}

std::int32_t snap_node(const RoadGraph& graph, geo::LatLon p, const geo::Projection& proj,
                       double max_snap_m) {
  std::int32_t best = -1;
  double best_d = max_snap_m;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const double d = proj.distance_m(p, graph.nodes[i].pos);
    if (d < best_d || (best < 0 && d <= max_snap_m)) {
      best_d = d;
      best = static_cast<std::int32_t>(i);
    }
  }
  if (best < 0)
    throw_error(errc::snap_failure, "no road node within " + std::to_string(max_snap_m) + " m");
  return best;
}

namespace {

double edge_speed(const RoadEdge& edge, Mode mode) {
  return mode == Mode::walk ? edge.walk_speed_mps : edge.drive_speed_mps;
}

}  // namespace

RoadPath road_route(const RoadGraph& graph, geo::LatLon origin, geo::LatLon dest, Mode mode,
                    const geo::Projection& proj, double max_snap_m) {
  if (graph.nodes.empty()) throw_error(errc::invalid_argument, "road graph is empty");
  const std::int32_t src = snap_node(graph, origin, proj, max_snap_m);
  const std::int32_t dst = snap_node(graph, dest, proj, max_snap_m);

  RoadPath path;
  path.src_node = src;
  path.dst_node = dst;
  if (src == dst) return path;

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(graph.nodes.size(), inf);
  dist[static_cast<std::size_t>(src)] = 0;

  using QE = std::pair<double, std::int32_t>;
  std::priority_queue<QE, std::vector<QE>, std::greater<>> queue;
  queue.emplace(0.0, src);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (std::int32_t e : graph.out_edges[static_cast<std::size_t>(u)]) {
      const RoadEdge& edge = graph.edges[static_cast<std::size_t>(e)];
      const double speed = edge_speed(edge, mode);
      if (!(speed > 0)) continue;
      const double nd = d + edge.length_m / speed;
      if (nd < dist[static_cast<std::size_t>(edge.to)]) {
        dist[static_cast<std::size_t>(edge.to)] = nd;
        queue.emplace(nd, edge.to);
      }
    }
  }
  if (dist[static_cast<std::size_t>(dst)] == inf)
    throw_error(errc::unreachable, "destination not reachable on the road graph");

  // mark nodes that reach dst inside the shortest-path DAG
  // (dist[u] + w == dist[v], bit-exact by construction of dist)
  std::vector<char> reaches(graph.nodes.size(), 0);
  reaches[static_cast<std::size_t>(dst)] = 1;
  {
    std::vector<std::vector<std::int32_t>> in_tight(graph.nodes.size());
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
      const RoadEdge& edge = graph.edges[e];
      const double speed = edge_speed(edge, mode);
      if (!(speed > 0)) continue;
      if (dist[static_cast<std::size_t>(edge.from)] == inf) continue;
      if (dist[static_cast<std::size_t>(edge.from)] + edge.length_m / speed ==
          dist[static_cast<std::size_t>(edge.to)])
        in_tight[static_cast<std::size_t>(edge.to)].push_back(static_cast<std::int32_t>(e));
    }
    std::vector<std::int32_t> stack{dst};
    while (!stack.empty()) {
      const std::int32_t v = stack.back();
      stack.pop_back();
      for (std::int32_t e : in_tight[static_cast<std::size_t>(v)]) {
        const std::int32_t u = graph.edges[static_cast<std::size_t>(e)].from;
        if (!reaches[static_cast<std::size_t>(u)]) {
          reaches[static_cast<std::size_t>(u)] = 1;
          stack.push_back(u);
        }
      }
    }
  }

  // greedy DAG walk: smallest edge id that stays on a shortest path
  std::int32_t cur = src;
  double elapsed = 0;
  while (cur != dst) {
    std::int32_t chosen = -1;
    std::int64_t chosen_id = 0;
    for (std::int32_t e : graph.out_edges[static_cast<std::size_t>(cur)]) {
      const RoadEdge& edge = graph.edges[static_cast<std::size_t>(e)];
      const double speed = edge_speed(edge, mode);
      if (!(speed > 0) || !reaches[static_cast<std::size_t>(edge.to)]) continue;
      if (dist[static_cast<std::size_t>(cur)] + edge.length_m / speed !=
          dist[static_cast<std::size_t>(edge.to)])
        continue;
      if (chosen < 0 || edge.id < chosen_id) {
        chosen = e;
        chosen_id = edge.id;
      }
    }
    if (chosen < 0) throw_error(errc::unreachable, "shortest-path walk lost the DAG");
    const RoadEdge& edge = graph.edges[static_cast<std::size_t>(chosen)];
    path.edge_pos.push_back(chosen);
    path.entry_offset_s.push_back(elapsed);
    elapsed += edge.length_m / edge_speed(edge, mode);
    path.distance_m += edge.length_m;
    cur = edge.to;
  }
  path.duration_s = elapsed;
  return path;
}

}  // namespace usim::roads
