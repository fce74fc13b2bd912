#pragma once

#include <optional>
#include <string>
#include <vector>

#include "usim/engine.hpp"
#include "usim/roads.hpp"
#include "usim/transit.hpp"

namespace usim::io {

struct HeatmapBin {
  std::string segment_id;
  engine::Mode mode = engine::Mode::walk;
  int bin = 0;  // hour 0-23 at the default 3600 s width
  long long count = 0;
};

struct Indicators {
  std::size_t trips = 0;  // completed trips
  std::size_t failed_trips = 0;
  bool empty = false;
  double share_walk = 0, share_transit = 0, share_drive = 0;
  double avg_distance_m = 0;
  double avg_distance_walk_m = 0, avg_distance_transit_m = 0, avg_distance_drive_m = 0;
  double total_emissions_g = 0;
};

// one count per traversed segment, keyed (segment, mode, entry-time bin);
// zero-count bins never appear
std::vector<HeatmapBin> accumulate_heatmap(const std::vector<engine::TripRecord>& trips,
                                           int bin_width_s);

Indicators compute_indicators(const std::vector<engine::TripRecord>& trips,
                              const engine::EmissionFactors& factors);

// segment id -> LineString endpoints for the GeoJSON export
class GeometryResolver {
public:
  GeometryResolver(const transit::TransitNetwork* net, const roads::RoadGraph* roads);
  std::optional<std::pair<geo::LatLon, geo::LatLon>> resolve(const std::string& segment_id) const;

private:
  const transit::TransitNetwork* net_;
  const roads::RoadGraph* roads_;
};

void write_trips_csv(const std::vector<engine::TripRecord>& trips, const std::string& path);
std::vector<engine::TripRecord> read_trips_csv(const std::string& path);

void write_heatmap_geojson(const std::vector<HeatmapBin>& bins, const GeometryResolver& geometry,
                           int bin_width_s, const std::string& path);
void write_indicators_json(const Indicators& indicators, const std::string& path);

// trips.csv, heatmap.geojson, indicators.json and population.jsonl under
// out_dir; byte-identical for identical inputs
void export_outputs(const std::vector<engine::TripRecord>& trips,
                    const std::vector<HeatmapBin>& bins, const Indicators& indicators,
                    const std::vector<population::AgentProfile>& profiles,
                    const GeometryResolver& geometry, int bin_width_s,
                    const std::string& out_dir);

}  // namespace usim::io
