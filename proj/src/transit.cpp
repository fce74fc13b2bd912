#include "usim/transit.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "usim/error.hpp"

namespace usim::transit {

StopIdx TransitNetwork::stop_index(const std::string& id) const {
  auto it = stop_ids.find(id);
  if (it == stop_ids.end()) throw_error(errc::unknown_stop, "unknown stop: " + id);
  return it->second;
}

void TransitNetwork::finalize() {
  stop_ids.clear();
  for (std::size_t i = 0; i < stops.size(); ++i)
    stop_ids.emplace(stops[i].id, static_cast<StopIdx>(i));

  routes_at.assign(stops.size(), {});
  for (std::size_t r = 0; r < routes.size(); ++r) {
    const Route& route = routes[r];
    for (std::size_t pos = 0; pos < route.stops.size(); ++pos) {
      const StopIdx s = route.stops[pos];
      if (s < 0 || s >= static_cast<StopIdx>(stops.size()))
        throw_error(errc::invalid_argument, "route " + route.id + " references unknown stop");
      routes_at[s].emplace_back(static_cast<RouteIdx>(r), static_cast<int>(pos));
    }

    for (TripIdx t : route.trips) {
      const Trip& trip = trips[t];
      if (trip.events.size() != route.stops.size())
        throw_error(errc::invalid_argument, "trip " + trip.id + " event count mismatch");
      for (std::size_t pos = 0; pos < trip.events.size(); ++pos) {
        if (trip.events[pos].departure_s < trip.events[pos].arrival_s)
          throw_error(errc::invalid_argument, "trip " + trip.id + " departs before it arrives");
        if (pos > 0 && trip.events[pos].arrival_s < trip.events[pos - 1].departure_s)
          throw_error(errc::invalid_argument, "trip " + trip.id + " has nonmonotonic times");
      }
    }
    for (std::size_t i = 1; i < route.trips.size(); ++i) {
      const Trip& a = trips[route.trips[i - 1]];
      const Trip& b = trips[route.trips[i]];
      for (std::size_t pos = 0; pos < route.stops.size(); ++pos) {
        if (b.events[pos].departure_s < a.events[pos].departure_s ||
            b.events[pos].arrival_s < a.events[pos].arrival_s)
          throw_error(errc::invalid_argument,
                      "route " + route.id + ": trip " + b.id + " overtakes " + a.id);
      }
    }
  }

  if (footpaths_from.size() != stops.size()) footpaths_from.resize(stops.size());
  for (std::size_t s = 0; s < footpaths_from.size(); ++s) {
    for (const Footpath& fp : footpaths_from[s]) {
      if (fp.from != static_cast<StopIdx>(s) || fp.to < 0 ||
          fp.to >= static_cast<StopIdx>(stops.size()) || fp.duration_s < 0 || fp.length_m < 0)
        throw_error(errc::invalid_argument, "invalid footpath from stop " + stops[s].id);
    }
  }
}

bool dominates(const Criteria& a, const Criteria& b) {
  if (a.arrival_s > b.arrival_s || a.trips > b.trips || a.walk_m > b.walk_m) return false;
  return a.arrival_s < b.arrival_s || a.trips < b.trips || a.walk_m < b.walk_m;
}

bool Bag::insert(const LabelPtr& label) {
  for (const auto& member : labels_) {
    if (member->crit == label->crit || dominates(member->crit, label->crit)) return false;
  }
  std::erase_if(labels_, [&](const LabelPtr& member) {
    return dominates(label->crit, member->crit);
  });
  labels_.push_back(label);
  return true;
}

// ---------------------------------------------------------------------------

namespace {

// label riding a route during a scan: criteria frozen at boarding
struct RouteLabel {
  LabelPtr boarded_from;
  Criteria at_boarding;
  TripIdx trip = -1;       // index into net.trips
  int trip_rank = -1;      // position within route.trips; lower = earlier
  int board_pos = -1;
};

// With a shared stop sequence and no overtaking, a lower trip rank arrives no
// later at every downstream stop, so rank joins the boarding criteria in the
// route-bag dominance.
bool route_dominates(const RouteLabel& a, const RouteLabel& b) {
  if (a.trip_rank > b.trip_rank || a.at_boarding.trips > b.at_boarding.trips ||
      a.at_boarding.walk_m > b.at_boarding.walk_m)
    return false;
  return a.trip_rank < b.trip_rank || a.at_boarding.trips < b.at_boarding.trips ||
         a.at_boarding.walk_m < b.at_boarding.walk_m;
}

void sort_canonical(std::vector<LabelPtr>& labels) {
  std::sort(labels.begin(), labels.end(), [](const LabelPtr& a, const LabelPtr& b) {
    if (a->crit.arrival_s != b->crit.arrival_s) return a->crit.arrival_s < b->crit.arrival_s;
    if (a->crit.trips != b->crit.trips) return a->crit.trips < b->crit.trips;
    return a->crit.walk_m < b->crit.walk_m;
  });
}

}  // namespace

Bag mcraptor_query(const TransitNetwork& net, StopIdx origin, StopIdx target, int depart_s,
                   int max_rounds) {
  const auto n_stops = static_cast<StopIdx>(net.stops.size());
  if (origin < 0 || origin >= n_stops || target < 0 || target >= n_stops)
    throw_error(errc::unknown_stop, "mcraptor_query: stop index out of range");
  if (max_rounds < 1) throw_error(errc::invalid_argument, "max_rounds must be >= 1");

  // bags[s]: boarding + answer bag (all arrival kinds). Labels that arrived on
  // foot may not walk again, so footpath relaxation sources live in a separate
  // per-stop bag of transit-arrived (or initial) labels.
  std::vector<Bag> bags(net.stops.size());
  std::vector<Bag> walkable(net.stops.size());
  std::vector<std::vector<LabelPtr>> board_candidates(net.stops.size());

  auto origin_label = std::make_shared<Label>(
      Label{Criteria{depart_s, 0, 0.0}, origin, nullptr, std::monostate{}});
  bags[origin].insert(origin_label);
  walkable[origin].insert(origin_label);
  board_candidates[origin].push_back(origin_label);

  // single-hop footpath relaxation from freshly alighted (or initial) labels
  auto relax_footpaths = [&](const std::vector<std::pair<StopIdx, LabelPtr>>& sources) {
    for (const auto& [s, label] : sources) {
      for (const Footpath& fp : net.footpaths_from[s]) {
        auto walked = std::make_shared<Label>(
            Label{Criteria{label->crit.arrival_s + fp.duration_s, label->crit.trips,
                           label->crit.walk_m + fp.length_m},
                  fp.to, label, FootLeg{fp.from, fp.to}});
        if (bags[fp.to].insert(walked)) board_candidates[fp.to].push_back(walked);
      }
    }
  };
  relax_footpaths({{origin, origin_label}});

  for (int round = 1; round <= max_rounds; ++round) {
    // routes touching stops with fresh labels, each with the first position
    // the scan must start from
    std::map<RouteIdx, int> queue;
    for (StopIdx s = 0; s < n_stops; ++s) {
      if (board_candidates[s].empty()) continue;
      for (const auto& [route, pos] : net.routes_at[s]) {
        auto [it, inserted] = queue.emplace(route, pos);
        if (!inserted && pos < it->second) it->second = pos;
      }
    }
    if (queue.empty()) break;

    std::vector<std::vector<LabelPtr>> fresh_boarders(std::move(board_candidates));
    board_candidates.assign(net.stops.size(), {});
    std::vector<std::pair<StopIdx, LabelPtr>> alighted;

    for (const auto& [route_idx, first_pos] : queue) {
      const Route& route = net.routes[route_idx];
      std::vector<RouteLabel> riding;
      for (std::size_t pos = static_cast<std::size_t>(first_pos); pos < route.stops.size();
           ++pos) {
        const StopIdx stop = route.stops[pos];

        // alight everything boarded strictly upstream
        for (const RouteLabel& rl : riding) {
          if (rl.board_pos >= static_cast<int>(pos)) continue;
          const Trip& trip = net.trips[rl.trip];
          auto label = std::make_shared<Label>(
              Label{Criteria{trip.events[pos].arrival_s, rl.at_boarding.trips + 1,
                             rl.at_boarding.walk_m},
                    stop, rl.boarded_from,
                    TransitLeg{rl.trip, rl.board_pos, static_cast<int>(pos)}});
          const bool usable_for_boarding = bags[stop].insert(label);
          if (usable_for_boarding) board_candidates[stop].push_back(label);
          // walking continuations need the label even when a foot-arrived
          // member of the main bag dominates it
          if (walkable[stop].insert(label)) alighted.emplace_back(stop, label);
        }

        // board: earliest catchable trip per fresh label from the last round
        for (const LabelPtr& label : fresh_boarders[stop]) {
          int rank = -1;
          for (std::size_t t = 0; t < route.trips.size(); ++t) {
            if (net.trips[route.trips[t]].events[pos].departure_s >= label->crit.arrival_s) {
              rank = static_cast<int>(t);
              break;
            }
          }
          if (rank < 0) continue;
          RouteLabel candidate{label, label->crit, route.trips[rank], rank,
                               static_cast<int>(pos)};
          bool dominated = false;
          for (const RouteLabel& rl : riding) {
            if (route_dominates(rl, candidate) ||
                (rl.trip_rank == candidate.trip_rank &&
                 rl.at_boarding.trips == candidate.at_boarding.trips &&
                 rl.at_boarding.walk_m == candidate.at_boarding.walk_m)) {
              dominated = true;
              break;
            }
          }
          if (dominated) continue;
          std::erase_if(riding, [&](const RouteLabel& rl) {
            return route_dominates(candidate, rl);
          });
          riding.push_back(candidate);
        }
      }
    }

    relax_footpaths(alighted);

    bool any_fresh = false;
    for (const auto& fresh : board_candidates) any_fresh = any_fresh || !fresh.empty();
    if (!any_fresh) break;
  }

  Bag result = bags[target];
  std::vector<LabelPtr> ordered = result.labels();
  sort_canonical(ordered);
  Bag sorted;
  for (const auto& l : ordered) sorted.insert(l);
  return sorted;
}

// ---------------------------------------------------------------------------

bool dominates_range(const RangeLabel& a, const RangeLabel& b) {
  if (a.departure_s < b.departure_s || a.label->crit.arrival_s > b.label->crit.arrival_s ||
      a.label->crit.trips > b.label->crit.trips || a.label->crit.walk_m > b.label->crit.walk_m)
    return false;
  return a.departure_s > b.departure_s || a.label->crit.arrival_s < b.label->crit.arrival_s ||
         a.label->crit.trips < b.label->crit.trips || a.label->crit.walk_m < b.label->crit.walk_m;
}

std::vector<RangeLabel> mcrange_query(const TransitNetwork& net, StopIdx origin, StopIdx target,
                                      int t0, int t1, int max_rounds) {
  const auto n_stops = static_cast<StopIdx>(net.stops.size());
  if (origin < 0 || origin >= n_stops || target < 0 || target >= n_stops)
    throw_error(errc::unknown_stop, "mcrange_query: stop index out of range");
  if (t0 > t1) throw_error(errc::invalid_argument, "mcrange_query: t0 must be <= t1");

  std::set<int, std::greater<int>> events;
  events.insert(t1);  // walking journeys depart as late as the window allows
  auto add_boardable_departures = [&](StopIdx s, int access_walk_s) {
    for (const auto& [route_idx, pos] : net.routes_at[s]) {
      for (TripIdx t : net.routes[route_idx].trips) {
        const int depart = net.trips[t].events[pos].departure_s - access_walk_s;
        if (depart >= t0 && depart <= t1) events.insert(depart);
      }
    }
  };
  add_boardable_departures(origin, 0);
  for (const Footpath& fp : net.footpaths_from[origin])
    add_boardable_departures(fp.to, fp.duration_s);

  std::vector<RangeLabel> front;
  auto merge = [&](const RangeLabel& candidate) {
    for (const auto& member : front) {
      if (dominates_range(member, candidate) ||
          (member.departure_s == candidate.departure_s &&
           member.label->crit == candidate.label->crit))
        return;
    }
    std::erase_if(front, [&](const RangeLabel& member) {
      return dominates_range(candidate, member);
    });
    front.push_back(candidate);
  };

  for (int depart : events) {  // descending
    const Bag bag = mcraptor_query(net, origin, target, depart, max_rounds);
    for (const auto& label : bag.labels()) merge(RangeLabel{depart, label});
  }

  std::sort(front.begin(), front.end(), [](const RangeLabel& a, const RangeLabel& b) {
    if (a.departure_s != b.departure_s) return a.departure_s > b.departure_s;
    if (a.label->crit.arrival_s != b.label->crit.arrival_s)
      return a.label->crit.arrival_s < b.label->crit.arrival_s;
    if (a.label->crit.trips != b.label->crit.trips)
      return a.label->crit.trips < b.label->crit.trips;
    return a.label->crit.walk_m < b.label->crit.walk_m;
  });
  return front;
}

std::vector<JourneyLeg> reconstruct_journey(const LabelPtr& label, const TransitNetwork& net) {
  std::vector<JourneyLeg> legs;
  for (LabelPtr cur = label; cur && cur->parent; cur = cur->parent) {
    JourneyLeg leg;
    if (const auto* transit = std::get_if<TransitLeg>(&cur->leg)) {
      const Trip& trip = net.trips[transit->trip];
      const Route& route = net.routes[trip.route];
      leg.is_transit = true;
      leg.trip = transit->trip;
      leg.from = route.stops[static_cast<std::size_t>(transit->board_pos)];
      leg.to = route.stops[static_cast<std::size_t>(transit->alight_pos)];
      leg.depart_s = trip.events[static_cast<std::size_t>(transit->board_pos)].departure_s;
      leg.arrive_s = cur->crit.arrival_s;
    } else if (const auto* foot = std::get_if<FootLeg>(&cur->leg)) {
      leg.is_transit = false;
      leg.from = foot->from;
      leg.to = foot->to;
      leg.depart_s = cur->parent->crit.arrival_s;
      leg.arrive_s = cur->crit.arrival_s;
      leg.walk_m = cur->crit.walk_m - cur->parent->crit.walk_m;
    }
    legs.push_back(leg);
  }
  std::reverse(legs.begin(), legs.end());
  return legs;
}

}  // namespace usim::transit
