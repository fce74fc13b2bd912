#include "usim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <variant>

#include "usim/error.hpp"
#include "usim/rng.hpp"

namespace usim::engine {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::walk: return "walk";
    case Mode::transit: return "transit";
    case Mode::drive: return "drive";
  }
  return "walk";
}

Mode mode_from(std::string_view s) {
  if (s == "walk") return Mode::walk;
  if (s == "transit") return Mode::transit;
  if (s == "drive") return Mode::drive;
  throw_error(errc::invalid_argument, "unknown mode: " + std::string(s));
}

double EmissionFactors::factor(Mode mode) const {
  switch (mode) {
    case Mode::walk: return walk_g_per_km;
    case Mode::transit: return transit_g_per_km;
    case Mode::drive: return drive_g_per_km;
  }
  return 0;
}

void EmissionFactors::validate() const {
  if (walk_g_per_km != 0)
    throw_error(errc::invalid_argument, "walk emission factor must be 0");
  if (transit_g_per_km < 0 || drive_g_per_km < 0)
    throw_error(errc::invalid_argument, "emission factors must be >= 0");
}

namespace {

int ceil_seconds(double s) { return static_cast<int>(std::ceil(s - 1e-9)); }

transit::StopIdx nearest_stop(const transit::TransitNetwork& net, geo::LatLon p,
                              const geo::Projection& proj, double max_m, double* out_dist) {
  transit::StopIdx best = -1;
  double best_d = max_m;
  for (std::size_t i = 0; i < net.stops.size(); ++i) {
    const double d = proj.distance_m(p, net.stops[i].pos);
    if (d < best_d || (best < 0 && d <= max_m)) {
      best_d = d;
      best = static_cast<transit::StopIdx>(i);
    }
  }
  if (out_dist != nullptr) *out_dist = best_d;
  return best;
}

struct Candidate {
  Mode mode = Mode::walk;
  double duration_s = 0;
  double walk_m = 0;
  int transfers = 0;
  RoutedTrip routed;
};

// Road path plus straight-line access/egress walking between the true
// endpoints and their snapped nodes (no segments off the network).
RoutedTrip route_on_roads(const World& world, geo::LatLon origin, geo::LatLon dest, Mode mode,
                          int depart_s, double walk_speed_mps) {
  const auto road_mode = mode == Mode::walk ? roads::Mode::walk : roads::Mode::drive;
  const auto path = roads::road_route(*world.roads, origin, dest, road_mode, world.proj);
  const double access_m = world.proj.distance_m(
      origin, world.roads->nodes[static_cast<std::size_t>(path.src_node)].pos);
  const double egress_m = world.proj.distance_m(
      world.roads->nodes[static_cast<std::size_t>(path.dst_node)].pos, dest);
  const double access_s = access_m / walk_speed_mps;

  RoutedTrip routed;
  routed.mode = mode;
  routed.distance_m = access_m + path.distance_m + egress_m;
  routed.duration_s = path.duration_s + (access_m + egress_m) / walk_speed_mps;
  routed.walk_m = mode == Mode::walk ? routed.distance_m : access_m + egress_m;
  routed.segments.reserve(path.edge_pos.size());
  for (std::size_t i = 0; i < path.edge_pos.size(); ++i) {
    const auto& edge = world.roads->edges[static_cast<std::size_t>(path.edge_pos[i])];
    routed.segments.push_back(Segment{
        "e" + std::to_string(edge.id),
        depart_s + ceil_seconds(access_s + path.entry_offset_s[i])});
  }
  return routed;
}

// in-vehicle length of a transit leg: summed consecutive stop distances
double leg_length_m(const World& world, const transit::TransitLeg& leg) {
  const auto& trip = world.net->trips[static_cast<std::size_t>(leg.trip)];
  const auto& route = world.net->routes[static_cast<std::size_t>(trip.route)];
  double total = 0;
  for (int pos = leg.board_pos; pos < leg.alight_pos; ++pos) {
    const auto& a = world.net->stops[static_cast<std::size_t>(route.stops[pos])];
    const auto& b = world.net->stops[static_cast<std::size_t>(route.stops[pos + 1])];
    total += world.proj.distance_m(a.pos, b.pos);
  }
  return total;
}

std::optional<RoutedTrip> transit_candidate(const World& world, int depart_s,
                                            const SimulationConfig& config,
                                            const transit::LabelPtr& label, double access_m,
                                            double egress_m) {
  if (label->crit.trips < 1) return std::nullopt;  // walking is its own mode

  RoutedTrip routed;
  routed.mode = Mode::transit;
  routed.transfers = label->crit.trips - 1;
  const int egress_s = ceil_seconds(egress_m / config.walk_speed_mps);
  routed.duration_s = static_cast<double>(label->crit.arrival_s + egress_s - depart_s);
  routed.walk_m = access_m + label->crit.walk_m + egress_m;
  routed.distance_m = access_m + egress_m;  // off-network legs have no segments

  std::vector<const transit::Label*> chain;
  for (const transit::Label* cur = label.get(); cur != nullptr && cur->parent != nullptr;
       cur = cur->parent.get())
    chain.push_back(cur);
  std::reverse(chain.begin(), chain.end());

  for (const transit::Label* lbl : chain) {
    if (const auto* leg = std::get_if<transit::TransitLeg>(&lbl->leg)) {
      const auto& trip = world.net->trips[static_cast<std::size_t>(leg->trip)];
      const auto& route = world.net->routes[static_cast<std::size_t>(trip.route)];
      routed.distance_m += leg_length_m(world, *leg);
      for (int pos = leg->board_pos; pos < leg->alight_pos; ++pos) {
        const auto& from = world.net->stops[static_cast<std::size_t>(route.stops[pos])];
        const auto& to = world.net->stops[static_cast<std::size_t>(route.stops[pos + 1])];
        routed.segments.push_back(
            Segment{"t:" + from.id + ">" + to.id, trip.events[pos].departure_s});
      }
    } else if (const auto* foot = std::get_if<transit::FootLeg>(&lbl->leg)) {
      const auto& from = world.net->stops[static_cast<std::size_t>(foot->from)];
      const auto& to = world.net->stops[static_cast<std::size_t>(foot->to)];
      routed.distance_m += lbl->crit.walk_m - lbl->parent->crit.walk_m;
      routed.segments.push_back(
          Segment{"f:" + from.id + ">" + to.id, lbl->parent->crit.arrival_s});
    }
  }
  return routed;
}

}  // namespace

RoutedTrip choose_mode(const World& world, const population::AgentProfile& profile,
                       geo::LatLon origin, geo::LatLon dest, int depart_s,
                       const SimulationConfig& config) {
  if (world.proj.distance_m(origin, dest) == 0.0) {
    RoutedTrip stay;
    stay.mode = Mode::walk;
    return stay;  // degenerate trip: zero duration and distance
  }

  std::vector<Candidate> candidates;

  // transit labels first so the tie-break order is transit > walk > drive
  if (world.net != nullptr && !world.net->stops.empty()) {
    double access_m = 0, egress_m = 0;
    const auto origin_stop =
        nearest_stop(*world.net, origin, world.proj, config.walk_max_distance_m, &access_m);
    const auto dest_stop =
        nearest_stop(*world.net, dest, world.proj, config.walk_max_distance_m, &egress_m);
    if (origin_stop >= 0 && dest_stop >= 0 && origin_stop != dest_stop) {
      const int stop_depart = depart_s + ceil_seconds(access_m / config.walk_speed_mps);
      const auto bag = transit::mcraptor_query(*world.net, origin_stop, dest_stop, stop_depart,
                                               config.max_rounds);
      for (const auto& label : bag.labels()) {
        auto routed = transit_candidate(world, depart_s, config, label, access_m, egress_m);
        if (routed)
          candidates.push_back(Candidate{Mode::transit, routed->duration_s, routed->walk_m,
                                         routed->transfers, std::move(*routed)});
      }
    }
  }

  try {
    auto walk = route_on_roads(world, origin, dest, Mode::walk, depart_s, config.walk_speed_mps);
    if (walk.distance_m <= config.walk_max_distance_m)
      candidates.push_back(Candidate{Mode::walk, walk.duration_s, walk.walk_m, 0, std::move(walk)});
  } catch (const error&) {
    // unreachable or unsnappable on foot: simply not a candidate
  }
  try {
    auto drive =
        route_on_roads(world, origin, dest, Mode::drive, depart_s, config.walk_speed_mps);
    candidates.push_back(
        Candidate{Mode::drive, drive.duration_s, drive.walk_m, 0, std::move(drive)});
  } catch (const error&) {
  }

  if (candidates.empty())
    throw_error(errc::no_feasible_mode, "no feasible mode for this trip");

  double max_duration = 0, max_walk = 0;
  for (const auto& c : candidates) {
    max_duration = std::max(max_duration, c.duration_s);
    max_walk = std::max(max_walk, c.walk_m);
  }

  const auto pref = [&](Mode mode) {
    switch (mode) {
      case Mode::walk: return profile.mode_prefs.walk;
      case Mode::transit: return profile.mode_prefs.transit;
      case Mode::drive: return profile.mode_prefs.drive;
    }
    return 0.0;
  };

  std::size_t best = 0;
  double best_utility = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    double utility = pref(c.mode) - config.utility.gamma * c.transfers;
    if (max_duration > 0) utility -= config.utility.alpha * (c.duration_s / max_duration);
    if (max_walk > 0) utility -= config.utility.beta * (c.walk_m / max_walk);
    if (utility > best_utility) {
      best_utility = utility;
      best = i;
    }
  }
  return candidates[best].routed;
}

// ---------------------------------------------------------------------------

namespace {

geo::LatLon activity_position(const World& world, const population::AgentProfile& profile,
                              const schedule::Activity& act, geo::LatLon current,
                              rng::Stream& occasional_stream, const schedule::HuffParams& huff) {
  switch (act.kind) {
    case schedule::LocationKind::home:
      return world.grid->cell(profile.home_cell_id.value()).centroid;
    case schedule::LocationKind::routine:
      return world.pois->by_id(profile.routine_poi_id.value()).pos;
    case schedule::LocationKind::occasional: {
      if (!act.poi_category)
        throw_error(errc::no_candidates,
                    "occasional activity '" + act.label + "' has no resolved category");
      const auto poi_id = schedule::choose_occasional(world.proj, current, *act.poi_category,
                                                      *world.pois, huff, occasional_stream);
      return world.pois->by_id(poi_id).pos;
    }
  }
  return current;
}

void simulate_agent(const World& world, const population::AgentProfile& profile,
                    const schedule::DailySchedule& sched, const SimulationConfig& config,
                    const schedule::HuffParams& huff, std::vector<TripRecord>& out) {
  if (!profile.home_cell_id || !profile.routine_poi_id)
    throw_error(errc::invalid_argument, "agent " + std::to_string(profile.agent_id) +
                                            " lacks home or routine allocation");
  if (auto violation = sched.violation())
    throw_error(errc::invalid_schedule,
                "agent " + std::to_string(profile.agent_id) + ": " + *violation);

  auto occasional_stream =
      rng::derive_stream(config.master_seed, static_cast<std::uint64_t>(profile.agent_id),
                         "occasional");

  geo::LatLon current = world.grid->cell(profile.home_cell_id.value()).centroid;
  int trip_index = 0;
  int last_arrival_s = 0;

  for (std::size_t i = 1; i < sched.activities.size(); ++i) {
    const auto& act = sched.activities[i];
    const int depart_s = std::max(sched.activities[i - 1].end_s, last_arrival_s);

    geo::LatLon dest;
    bool resolved = true;
    try {
      dest = activity_position(world, profile, act, current, occasional_stream, huff);
    } catch (const error&) {
      resolved = false;
    }
    if (!resolved) {  // destination unknown: agent stays put, trip is flagged
      TripRecord failed;
      failed.agent_id = profile.agent_id;
      failed.trip_index = trip_index++;
      failed.depart_s = depart_s;
      failed.arrive_s = depart_s;
      failed.failed = true;
      out.push_back(std::move(failed));
      last_arrival_s = depart_s;
      continue;
    }
    if (dest == current) continue;  // no movement, no trip

    TripRecord record;
    record.agent_id = profile.agent_id;
    record.trip_index = trip_index++;
    record.depart_s = depart_s;
    try {
      RoutedTrip routed = choose_mode(world, profile, current, dest, depart_s, config);
      record.mode = routed.mode;
      record.arrive_s = depart_s + ceil_seconds(routed.duration_s);
      record.distance_m = routed.distance_m;
      record.segments = std::move(routed.segments);
      record.emissions_g =
          (routed.distance_m / 1000.0) * config.emissions.factor(routed.mode);
      record.late = record.arrive_s > act.start_s;
    } catch (const error&) {
      record.arrive_s = depart_s;  // routing failed; the schedule carries on
      record.failed = true;
    }
    last_arrival_s = record.arrive_s;
    current = dest;
    out.push_back(std::move(record));
  }
}

}  // namespace

std::vector<TripRecord> simulate_day(const World& world,
                                     const std::vector<population::AgentProfile>& agents,
                                     const std::vector<schedule::DailySchedule>& schedules,
                                     const SimulationConfig& config,
                                     const schedule::HuffParams& huff) {
  if (agents.size() != schedules.size())
    throw_error(errc::invalid_argument, "simulate_day: one schedule per agent required");
  config.emissions.validate();
  huff.validate();

  const int workers = std::max(1, config.workers);
  std::vector<std::vector<TripRecord>> buffers(static_cast<std::size_t>(workers));

  if (workers == 1) {
    for (std::size_t i = 0; i < agents.size(); ++i)
      simulate_agent(world, agents[i], schedules[i], config, huff, buffers[0]);
  } else {
    // contiguous chunks; per-agent rng streams make the partition irrelevant
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    const std::size_t chunk = (agents.size() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          const std::size_t begin = static_cast<std::size_t>(w) * chunk;
          const std::size_t end = std::min(agents.size(), begin + chunk);
          for (std::size_t i = begin; i < end; ++i)
            simulate_agent(world, agents[i], schedules[i], config, huff,
                           buffers[static_cast<std::size_t>(w)]);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<TripRecord> trips;
  for (auto& buffer : buffers)
    for (auto& t : buffer) trips.push_back(std::move(t));
  std::sort(trips.begin(), trips.end(), [](const TripRecord& a, const TripRecord& b) {
    if (a.agent_id != b.agent_id) return a.agent_id < b.agent_id;
    return a.trip_index < b.trip_index;
  });
  return trips;
}

}  // namespace usim::engine
