#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "usim/geo.hpp"

namespace usim::transit {

using StopIdx = std::int32_t;
using RouteIdx = std::int32_t;
using TripIdx = std::int32_t;

struct Stop {
  std::string id;
  std::string name;
  geo::LatLon pos;
};

struct StopEvent {
  int arrival_s = 0;
  int departure_s = 0;
};

struct Trip {
  std::string id;
  RouteIdx route = -1;
  std::vector<StopEvent> events;  // one per stop of the route, in sequence
};

struct Route {
  std::string id;
  std::vector<StopIdx> stops;
  std::vector<TripIdx> trips;  // sorted by departure at the first stop
};

struct Footpath {
  StopIdx from = -1, to = -1;
  int duration_s = 0;
  double length_m = 0;
};

// Timetable substrate for the multi-criteria router. Footpaths are used
// exactly as given (journeys never chain two walks); the zero-cost self-loop
// at every stop is implicit.
struct TransitNetwork {
  std::vector<Stop> stops;
  std::vector<Route> routes;
  std::vector<Trip> trips;
  std::vector<std::vector<Footpath>> footpaths_from;                  // by from-stop
  std::vector<std::vector<std::pair<RouteIdx, int>>> routes_at;      // stop -> (route, position)
  std::unordered_map<std::string, StopIdx> stop_ids;

  StopIdx stop_index(const std::string& id) const;  // throws unknown_stop

  // builds the lookup structures and enforces the timetable invariants:
  // nondecreasing times along each trip, departure >= arrival per stop,
  // shared stop sequence and no overtaking within a route
  void finalize();
};

// journey criteria; all three minimized
struct Criteria {
  int arrival_s = 0;
  int trips = 0;
  double walk_m = 0;

  friend bool operator==(const Criteria&, const Criteria&) = default;
};

// a <= b in every component and a != b
bool dominates(const Criteria& a, const Criteria& b);

struct TransitLeg {
  TripIdx trip = -1;
  int board_pos = -1, alight_pos = -1;  // positions along the trip's route
};
struct FootLeg {
  StopIdx from = -1, to = -1;
};

struct Label {
  Criteria crit;
  StopIdx at = -1;
  std::shared_ptr<const Label> parent;  // origin label has none
  std::variant<std::monostate, TransitLeg, FootLeg> leg;
};
using LabelPtr = std::shared_ptr<const Label>;

// Pareto set of labels (mutual non-domination on criteria)
class Bag {
public:
  // Rejects candidates dominated by (or equal to) a member; otherwise inserts
  // and evicts every member the candidate dominates. Returns whether the bag
  // changed.
  bool insert(const LabelPtr& label);

  const std::vector<LabelPtr>& labels() const { return labels_; }
  bool empty() const { return labels_.empty(); }
  std::size_t size() const { return labels_.size(); }

private:
  std::vector<LabelPtr> labels_;
};

// Round-based multi-criteria RAPTOR. Returns the Pareto set over all rounds
// at the target; round k alights exactly k trips. Labels reconstruct to
// feasible journeys of the form [foot] (trip [foot])*.
Bag mcraptor_query(const TransitNetwork& net, StopIdx origin, StopIdx target, int depart_s,
                   int max_rounds = 4);

struct RangeLabel {
  int departure_s = 0;  // maximized in the extended criteria
  LabelPtr label;
};

// a dominates b under (departure max; arrival, trips, walk min)
bool dominates_range(const RangeLabel& a, const RangeLabel& b);

// Range query over [t0, t1]: one single-departure run per relevant departure
// event (trip departures at the origin and its footpath neighbours, shifted
// back by the access walk, plus the window end for time-independent walking
// journeys), merged into one extended Pareto set.
std::vector<RangeLabel> mcrange_query(const TransitNetwork& net, StopIdx origin, StopIdx target,
                                      int t0, int t1, int max_rounds = 4);

struct JourneyLeg {
  bool is_transit = false;
  TripIdx trip = -1;  // -1 for foot legs
  StopIdx from = -1, to = -1;
  int depart_s = 0, arrive_s = 0;
  double walk_m = 0;  // foot legs only
};

// parent-chain unwind, origin first; empty for the trivial origin label
std::vector<JourneyLeg> reconstruct_journey(const LabelPtr& label, const TransitNetwork& net);

}  // namespace usim::transit
