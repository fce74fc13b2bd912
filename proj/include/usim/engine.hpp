#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "usim/geo.hpp"
#include "usim/geography.hpp"
#include "usim/population.hpp"
#include "usim/roads.hpp"
#include "usim/schedule.hpp"
#include "usim/transit.hpp"

namespace usim::engine {

enum class Mode { walk, transit, drive };
std::string_view to_string(Mode mode);
Mode mode_from(std::string_view s);

struct EmissionFactors {
  double walk_g_per_km = 0;  // must stay 0
  double transit_g_per_km = 68;
  double drive_g_per_km = 192;
  // configuration placeholders, not real-world constants; override per study

  double factor(Mode mode) const;
  void validate() const;
};

struct UtilityWeights {
  double alpha = 0.25;  // duration
  double beta = 0.15;   // walking
  double gamma = 0.05;  // transfer penalty
};

struct SimulationConfig {
  std::uint64_t master_seed = 42;
  EmissionFactors emissions;
  UtilityWeights utility;
  double walk_max_distance_m = 2000;
  int bin_width_s = 3600;
  int workers = 1;
  double walk_speed_mps = 1.4;  // off-network access/egress walking
  int max_rounds = 4;
};

struct Segment {
  std::string id;  // "e<edge_id>", "t:<stop>><stop>" or "f:<stop>><stop>"
  int entry_s = 0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct TripRecord {
  std::int64_t agent_id = 0;
  int trip_index = 0;
  std::optional<Mode> mode;  // empty for failed trips
  int depart_s = 0;
  int arrive_s = 0;
  double distance_m = 0;
  std::vector<Segment> segments;
  double emissions_g = 0;  // distance_km * factor(mode), exactly
  bool late = false;
  bool failed = false;
};

struct World {
  const geography::Grid* grid = nullptr;
  const geography::PoiIndex* pois = nullptr;
  const transit::TransitNetwork* net = nullptr;
  const roads::RoadGraph* roads = nullptr;
  geo::Projection proj;
};

struct RoutedTrip {
  Mode mode = Mode::walk;
  double distance_m = 0;
  double duration_s = 0;
  double walk_m = 0;
  int transfers = 0;
  std::vector<Segment> segments;  // absolute entry times
};

// Candidate set: walk (road route within walk_max_distance_m), drive, and
// every Pareto transit label; utility is
//   pref(mode) - alpha * duration/max_duration - beta * walk/max_walk
//   - gamma * transfers,
// argmaxed with ties resolved transit > walk > drive.
RoutedTrip choose_mode(const World& world, const population::AgentProfile& profile,
                       geo::LatLon origin, geo::LatLon dest, int depart_s,
                       const SimulationConfig& config);

// One simulated day. Occasional activities resolve lazily at trip time from
// the agent's current location; routing failures become flagged failed trips.
// Deterministic given config.master_seed and partition-invariant across
// workers.
std::vector<TripRecord> simulate_day(const World& world,
                                     const std::vector<population::AgentProfile>& agents,
                                     const std::vector<schedule::DailySchedule>& schedules,
                                     const SimulationConfig& config,
                                     const schedule::HuffParams& huff);

}  // namespace usim::engine
