#include "usim/ingest.hpp"

#include <algorithm>
#include <filesystem>
#include <map>

#include "usim/csv.hpp"
#include "usim/error.hpp"

namespace usim::io {

namespace fs = std::filesystem;

std::vector<population::MarginalTable> load_marginals(const std::string& path) {
  const auto table = csv::Table::read_file(path);
  const auto c_attr = table.column("attribute_id");
  const auto c_cat = table.column("category");
  const auto c_count = table.column("count");

  std::vector<population::MarginalTable> marginals;
  auto find = [&](const std::string& id) -> population::MarginalTable& {
    for (auto& m : marginals)
      if (m.attribute_id == id) return m;
    marginals.push_back(population::MarginalTable{id, {}, {}, 0});
    return marginals.back();
  };

  for (const auto& row : table.rows()) {
    const auto count = csv::parse_double(table.field(row, c_count));
    if (!count || *count < 0)
      throw_error(errc::malformed_row,
                  path + ":" + std::to_string(row.line) + ": bad count");
    auto& marginal = find(table.field(row, c_attr));
    marginal.labels.push_back(table.field(row, c_cat));
    marginal.counts.push_back(*count);
    marginal.total += *count;
  }
  for (const auto& m : marginals) m.validate();
  if (marginals.empty()) throw_error(errc::malformed_row, path + ": no marginal rows");
  return marginals;
}

population::SalaryBands load_salary_bands(const std::string& path) {
  const auto table = csv::Table::read_file(path);
  const auto c_band = table.column("income_band");
  const auto c_min = table.column("min_monthly");
  const auto c_max = table.column("max_monthly");

  population::SalaryBands bands;
  for (const auto& row : table.rows()) {
    const auto lo = csv::parse_double(table.field(row, c_min));
    const auto hi = csv::parse_double(table.field(row, c_max));
    if (!lo || !hi)
      throw_error(errc::malformed_row, path + ":" + std::to_string(row.line) + ": bad bounds");
    bands.bands.push_back({table.field(row, c_band), *lo, *hi});
  }
  bands.validate();
  return bands;
}

void load_cells(const std::string& path, geography::Grid& grid) {
  const auto table = csv::Table::read_file(path);
  const auto c_id = table.column("cell_id");
  const auto c_row = table.column("row");
  const auto c_col = table.column("col");
  const auto c_cap = table.column("capacity");
  const auto c_income = table.column("avg_income");

  for (const auto& row : table.rows()) {
    const auto id = csv::parse_int(table.field(row, c_id));
    const auto r = csv::parse_int(table.field(row, c_row));
    const auto c = csv::parse_int(table.field(row, c_col));
    const auto cap = csv::parse_int(table.field(row, c_cap));
    const auto income = csv::parse_double(table.field(row, c_income));
    const std::string where = path + ":" + std::to_string(row.line);
    if (!id || !r || !c || !cap || !income)
      throw_error(errc::malformed_row, where + ": bad cell row");
    if (*id < 0 || *id >= static_cast<long long>(grid.cells.size()))
      throw_error(errc::malformed_row, where + ": cell_id outside the grid");
    if (*id != *r * grid.spec.cols + *c)
      throw_error(errc::malformed_row, where + ": cell_id must equal row*cols+col");
    if (*cap < 0) throw_error(errc::malformed_row, where + ": capacity must be >= 0");
    auto& cell = grid.cells[static_cast<std::size_t>(*id)];
    cell.capacity = *cap;
    cell.avg_income = *income;
  }
}

std::vector<geography::Poi> load_pois(const std::string& path) {
  const auto table = csv::Table::read_file(path);
  const auto c_id = table.column("poi_id");
  const auto c_name = table.column("name");
  const auto c_cat = table.column("category");
  const auto c_ind = table.column("industry");
  const auto c_lat = table.column("lat");
  const auto c_lon = table.column("lon");
  const auto c_pop = table.column("popularity");
  const auto c_cred = table.column("credibility");

  std::vector<geography::Poi> pois;
  for (const auto& row : table.rows()) {
    const auto id = csv::parse_int(table.field(row, c_id));
    const auto lat = csv::parse_double(table.field(row, c_lat));
    const auto lon = csv::parse_double(table.field(row, c_lon));
    const auto pop = csv::parse_double(table.field(row, c_pop));
    const auto cred = csv::parse_double(table.field(row, c_cred));
    if (!id || !lat || !lon || !pop || !cred)
      throw_error(errc::malformed_row, path + ":" + std::to_string(row.line) + ": bad poi row");
    geography::Poi poi;
    poi.poi_id = *id;
    poi.name = table.field(row, c_name);
    poi.category = table.field(row, c_cat);
    poi.industry = table.field(row, c_ind);
    poi.pos = {*lat, *lon};
    poi.popularity = *pop;
    poi.credibility = *cred;
    pois.push_back(std::move(poi));
  }
  return pois;
}

geography::IndustryCatalog load_industry_catalog(const std::string& path) {
  const auto table = csv::Table::read_file(path);
  const auto c_ind = table.column("industry");
  const auto c_desc = table.column("description");
  geography::IndustryCatalog catalog;
  for (const auto& row : table.rows())
    catalog.entries.emplace_back(table.field(row, c_ind), table.field(row, c_desc));
  catalog.validate();
  return catalog;
}

schedule::CategoryCatalog load_category_catalog(const std::string& path) {
  const auto table = csv::Table::read_file(path);
  const auto c_cat = table.column("category");
  const auto c_desc = table.column("description");
  schedule::CategoryCatalog catalog;
  for (const auto& row : table.rows())
    catalog.emplace_back(table.field(row, c_cat), table.field(row, c_desc));
  return catalog;
}

roads::RoadGraph load_road_graph(const std::string& nodes_path, const std::string& edges_path) {
  roads::RoadGraph graph;
  {
    const auto table = csv::Table::read_file(nodes_path);
    const auto c_id = table.column("node_id");
    const auto c_lat = table.column("lat");
    const auto c_lon = table.column("lon");
    for (const auto& row : table.rows()) {
      const auto id = csv::parse_int(table.field(row, c_id));
      const auto lat = csv::parse_double(table.field(row, c_lat));
      const auto lon = csv::parse_double(table.field(row, c_lon));
      if (!id || !lat || !lon)
        throw_error(errc::malformed_row,
                    nodes_path + ":" + std::to_string(row.line) + ": bad node row");
      graph.nodes.push_back(roads::RoadNode{*id, {*lat, *lon}});
    }
  }
  std::unordered_map<std::int64_t, std::int32_t> node_pos;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i)
    node_pos.emplace(graph.nodes[i].id, static_cast<std::int32_t>(i));
  {
    const auto table = csv::Table::read_file(edges_path);
    const auto c_id = table.column("edge_id");
    const auto c_from = table.column("from");
    const auto c_to = table.column("to");
    const auto c_len = table.column("length_m");
    const auto c_walk = table.column("walk_speed");
    const auto c_drive = table.column("drive_speed");
    for (const auto& row : table.rows()) {
      const auto id = csv::parse_int(table.field(row, c_id));
      const auto from = csv::parse_int(table.field(row, c_from));
      const auto to = csv::parse_int(table.field(row, c_to));
      const auto len = csv::parse_double(table.field(row, c_len));
      const auto walk = csv::parse_double(table.field(row, c_walk));
      const auto drive = csv::parse_double(table.field(row, c_drive));
      const std::string where = edges_path + ":" + std::to_string(row.line);
      if (!id || !from || !to || !len || !walk || !drive)
        throw_error(errc::malformed_row, where + ": bad edge row");
      auto it_from = node_pos.find(*from);
      auto it_to = node_pos.find(*to);
      if (it_from == node_pos.end() || it_to == node_pos.end())
        throw_error(errc::malformed_row, where + ": edge references unknown node");
      graph.edges.push_back(
          roads::RoadEdge{*id, it_from->second, it_to->second, *len, *walk, *drive});
    }
  }
  graph.finalize();
  return graph;
}

// ---------------------------------------------------------------------------
// GTFS subset
// ---------------------------------------------------------------------------

namespace {

struct RawStopTime {
  int line = 0;
  int arrival_s = 0;
  int departure_s = 0;
  transit::StopIdx stop = -1;
  long long sequence = 0;
};

// no trip in `lane` may depart or arrive later than `candidate` anywhere
bool overtakes(const transit::Trip& earlier, const transit::Trip& later) {
  for (std::size_t pos = 0; pos < earlier.events.size(); ++pos) {
    if (later.events[pos].departure_s < earlier.events[pos].departure_s ||
        later.events[pos].arrival_s < earlier.events[pos].arrival_s)
      return true;
  }
  return false;
}

}  // namespace

transit::TransitNetwork ingest_transit_feed(const std::string& directory, IngestReport* report,
                                            const geo::Projection* proj) {
  IngestReport local_report;
  IngestReport& rep = report != nullptr ? *report : local_report;

  const auto file = [&](const char* name) {
    const fs::path p = fs::path(directory) / name;
    if (!fs::exists(p)) throw_error(errc::missing_file, "transit feed lacks " + p.string());
    return csv::Table::read_file(p.string());
  };

  transit::TransitNetwork net;

  // stops
  const auto stops = file("stops.txt");
  {
    const auto c_id = stops.column("stop_id");
    const auto c_lat = stops.column("stop_lat");
    const auto c_lon = stops.column("stop_lon");
    const std::size_t c_name = stops.has_column("stop_name") ? stops.column("stop_name") : c_id;
    std::unordered_map<std::string, bool> seen;
    for (const auto& row : stops.rows()) {
      const auto& id = stops.field(row, c_id);
      const auto lat = csv::parse_double(stops.field(row, c_lat));
      const auto lon = csv::parse_double(stops.field(row, c_lon));
      if (id.empty() || !lat || !lon) {
        rep.reject("stops.txt", row.line, "bad stop row");
        continue;
      }
      if (seen.contains(id)) {
        rep.reject("stops.txt", row.line, "duplicate stop_id " + id);
        continue;
      }
      seen.emplace(id, true);
      net.stops.push_back(transit::Stop{id, stops.field(row, c_name), {*lat, *lon}});
      rep.accept();
    }
  }
  std::unordered_map<std::string, transit::StopIdx> stop_of;
  for (std::size_t i = 0; i < net.stops.size(); ++i)
    stop_of.emplace(net.stops[i].id, static_cast<transit::StopIdx>(i));

  // routes
  std::unordered_map<std::string, bool> route_known;
  {
    const auto routes = file("routes.txt");
    const auto c_id = routes.column("route_id");
    for (const auto& row : routes.rows()) {
      const auto& id = routes.field(row, c_id);
      if (id.empty() || route_known.contains(id)) {
        rep.reject("routes.txt", row.line, "bad or duplicate route_id");
        continue;
      }
      route_known.emplace(id, true);
      rep.accept();
    }
  }

  // trips
  std::map<std::string, std::string> trip_route;  // ordered for determinism
  {
    const auto trips = file("trips.txt");
    const auto c_trip = trips.column("trip_id");
    const auto c_route = trips.column("route_id");
    for (const auto& row : trips.rows()) {
      const auto& trip_id = trips.field(row, c_trip);
      const auto& route_id = trips.field(row, c_route);
      if (trip_id.empty() || trip_route.contains(trip_id)) {
        rep.reject("trips.txt", row.line, "bad or duplicate trip_id");
        continue;
      }
      if (!route_known.contains(route_id)) {
        rep.reject("trips.txt", row.line, "trip " + trip_id + " references unknown route");
        continue;
      }
      trip_route.emplace(trip_id, route_id);
      rep.accept();
    }
  }

  // stop_times, grouped per trip
  std::map<std::string, std::vector<RawStopTime>> trip_events;
  {
    const auto stop_times = file("stop_times.txt");
    const auto c_trip = stop_times.column("trip_id");
    const auto c_arr = stop_times.column("arrival_time");
    const auto c_dep = stop_times.column("departure_time");
    const auto c_stop = stop_times.column("stop_id");
    const auto c_seq = stop_times.column("stop_sequence");
    for (const auto& row : stop_times.rows()) {
      const auto& trip_id = stop_times.field(row, c_trip);
      if (!trip_route.contains(trip_id)) {
        rep.reject("stop_times.txt", row.line, "unknown trip " + trip_id);
        continue;
      }
      const auto arr = csv::parse_gtfs_time(stop_times.field(row, c_arr));
      const auto dep = csv::parse_gtfs_time(stop_times.field(row, c_dep));
      const auto seq = csv::parse_int(stop_times.field(row, c_seq));
      auto stop_it = stop_of.find(stop_times.field(row, c_stop));
      if (!arr || !dep || !seq || stop_it == stop_of.end()) {
        rep.reject("stop_times.txt", row.line, "bad stop_time row");
        continue;
      }
      trip_events[trip_id].push_back(RawStopTime{row.line, *arr, *dep, stop_it->second, *seq});
    }

    // assemble and validate each trip; rejection covers all its rows
    std::map<std::string, transit::Trip> valid_trips;
    for (auto& [trip_id, events] : trip_events) {
      std::sort(events.begin(), events.end(),
                [](const RawStopTime& a, const RawStopTime& b) { return a.sequence < b.sequence; });
      std::string reason;
      if (events.size() < 2) reason = "trip " + trip_id + " has fewer than 2 stop_times";
      for (std::size_t i = 0; reason.empty() && i < events.size(); ++i) {
        if (i > 0 && events[i].sequence == events[i - 1].sequence)
          reason = "trip " + trip_id + " repeats a stop_sequence";
        else if (events[i].departure_s < events[i].arrival_s)
          reason = "trip " + trip_id + " departs before it arrives";
        else if (i > 0 && events[i].arrival_s < events[i - 1].departure_s)
          reason = "trip " + trip_id + " has nonmonotonic times";
      }
      if (!reason.empty()) {
        for (const auto& ev : events) rep.reject("stop_times.txt", ev.line, reason);
        continue;
      }
      transit::Trip trip;
      trip.id = trip_id;
      for (const auto& ev : events) trip.events.push_back({ev.arrival_s, ev.departure_s});
      valid_trips.emplace(trip_id, std::move(trip));
      for (std::size_t i = 0; i < events.size(); ++i) rep.accept();
    }

    // group by (gtfs route, stop sequence); split overtakers into lanes
    struct Group {
      std::vector<transit::StopIdx> stops;
      std::vector<std::pair<std::string, const transit::Trip*>> trips;
    };
    std::map<std::pair<std::string, std::string>, Group> groups;  // (route, seq key)
    for (const auto& [trip_id, trip] : valid_trips) {
      std::vector<transit::StopIdx> seq;
      std::string key;
      for (const auto& ev : trip_events[trip_id]) {
        seq.push_back(ev.stop);
        key += net.stops[static_cast<std::size_t>(ev.stop)].id + "|";
      }
      auto& group = groups[{trip_route[trip_id], key}];
      group.stops = seq;
      group.trips.emplace_back(trip_id, &trip);
    }

    struct PendingRoute {
      std::string gtfs_route;
      std::vector<transit::StopIdx> stops;
      std::vector<std::pair<std::string, const transit::Trip*>> trips;
    };
    std::vector<PendingRoute> pending;
    for (auto& [group_key, group] : groups) {
      std::sort(group.trips.begin(), group.trips.end(), [](const auto& a, const auto& b) {
        const int da = a.second->events.front().departure_s;
        const int db = b.second->events.front().departure_s;
        if (da != db) return da < db;
        return a.first < b.first;
      });

      std::vector<PendingRoute> lanes;
      for (const auto& [trip_id, trip] : group.trips) {
        bool placed = false;
        for (auto& lane : lanes) {
          if (!overtakes(*lane.trips.back().second, *trip)) {
            lane.trips.emplace_back(trip_id, trip);
            placed = true;
            break;
          }
        }
        if (!placed)
          lanes.push_back(PendingRoute{group_key.first, group.stops, {{trip_id, trip}}});
      }
      for (auto& lane : lanes) pending.push_back(std::move(lane));
    }

    std::map<std::string, int> internal_count;
    for (const auto& p : pending) ++internal_count[p.gtfs_route];
    std::map<std::string, int> internal_seen;
    for (auto& p : pending) {
      transit::Route route;
      route.id = p.gtfs_route;
      if (internal_count[p.gtfs_route] > 1)
        route.id += "#" + std::to_string(internal_seen[p.gtfs_route]++);
      route.stops = std::move(p.stops);
      for (auto& [trip_id, source] : p.trips) {
        transit::Trip trip = *source;
        trip.id = trip_id;
        trip.route = static_cast<transit::RouteIdx>(net.routes.size());
        route.trips.push_back(static_cast<transit::TripIdx>(net.trips.size()));
        net.trips.push_back(std::move(trip));
      }
      net.routes.push_back(std::move(route));
    }
  }

  // transfers -> footpaths (durations from the feed, lengths from geometry)
  {
    geo::Projection projection;
    if (proj != nullptr) {
      projection = *proj;
    } else {
      double lat_min = 90, lat_max = -90;
      for (const auto& s : net.stops) {
        lat_min = std::min(lat_min, s.pos.lat);
        lat_max = std::max(lat_max, s.pos.lat);
      }
      projection = geo::Projection(net.stops.empty() ? 0.0 : 0.5 * (lat_min + lat_max));
    }

    net.footpaths_from.assign(net.stops.size(), {});
    const auto transfers = file("transfers.txt");
    const auto c_from = transfers.column("from_stop_id");
    const auto c_to = transfers.column("to_stop_id");
    const bool has_time = transfers.has_column("min_transfer_time");
    for (const auto& row : transfers.rows()) {
      auto it_from = stop_of.find(transfers.field(row, c_from));
      auto it_to = stop_of.find(transfers.field(row, c_to));
      if (it_from == stop_of.end() || it_to == stop_of.end()) {
        rep.reject("transfers.txt", row.line, "transfer references unknown stop");
        continue;
      }
      if (it_from->second == it_to->second) {
        rep.reject("transfers.txt", row.line, "self transfer (implicit)");
        continue;
      }
      int duration = 120;
      if (has_time) {
        const auto& raw = transfers.field(row, transfers.column("min_transfer_time"));
        if (!raw.empty()) {
          const auto parsed = csv::parse_int(raw);
          if (!parsed || *parsed < 0) {
            rep.reject("transfers.txt", row.line, "bad min_transfer_time");
            continue;
          }
          duration = static_cast<int>(*parsed);
        }
      }
      const double length = projection.distance_m(
          net.stops[static_cast<std::size_t>(it_from->second)].pos,
          net.stops[static_cast<std::size_t>(it_to->second)].pos);
      net.footpaths_from[static_cast<std::size_t>(it_from->second)].push_back(
          transit::Footpath{it_from->second, it_to->second, duration, length});
      rep.accept();
    }
  }

  if (net.stops.empty() || net.trips.empty())
    throw_error(errc::empty_network, "transit feed yields no usable stops or trips");
  net.finalize();
  return net;
}

}  // namespace usim::io
