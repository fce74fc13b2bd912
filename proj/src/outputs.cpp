#include "usim/outputs.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "usim/csv.hpp"
#include "usim/error.hpp"

namespace usim::io {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::vector<HeatmapBin> accumulate_heatmap(const std::vector<engine::TripRecord>& trips,
                                           int bin_width_s) {
  if (bin_width_s <= 0 || 86400 % bin_width_s != 0)
    throw_error(errc::invalid_argument, "bin width must divide 86400");

  std::map<std::tuple<std::string, int, int>, long long> counts;
  for (const auto& trip : trips) {
    if (trip.failed || !trip.mode) continue;
    for (const auto& segment : trip.segments) {
      const int day_s = ((segment.entry_s % 86400) + 86400) % 86400;
      ++counts[{segment.id, static_cast<int>(*trip.mode), day_s / bin_width_s}];
    }
  }

  std::vector<HeatmapBin> bins;
  bins.reserve(counts.size());
  for (const auto& [key, count] : counts) {
    bins.push_back(HeatmapBin{std::get<0>(key), static_cast<engine::Mode>(std::get<1>(key)),
                              std::get<2>(key), count});
  }
  return bins;
}

Indicators compute_indicators(const std::vector<engine::TripRecord>& trips,
                              const engine::EmissionFactors& factors) {
  Indicators ind;
  double dist_total = 0;
  double dist_by_mode[3] = {0, 0, 0};
  std::size_t count_by_mode[3] = {0, 0, 0};

  for (const auto& trip : trips) {
    if (trip.failed || !trip.mode) {
      ++ind.failed_trips;
      continue;
    }
    ++ind.trips;
    const auto m = static_cast<std::size_t>(*trip.mode);
    ++count_by_mode[m];
    dist_by_mode[m] += trip.distance_m;
    dist_total += trip.distance_m;
    ind.total_emissions_g += (trip.distance_m / 1000.0) * factors.factor(*trip.mode);
  }

  if (ind.trips == 0) {
    ind.empty = true;
    return ind;
  }
  const double n = static_cast<double>(ind.trips);
  ind.share_walk = count_by_mode[0] / n;
  ind.share_transit = count_by_mode[1] / n;
  ind.share_drive = count_by_mode[2] / n;
  ind.avg_distance_m = dist_total / n;
  ind.avg_distance_walk_m = count_by_mode[0] > 0 ? dist_by_mode[0] / count_by_mode[0] : 0;
  ind.avg_distance_transit_m = count_by_mode[1] > 0 ? dist_by_mode[1] / count_by_mode[1] : 0;
  ind.avg_distance_drive_m = count_by_mode[2] > 0 ? dist_by_mode[2] / count_by_mode[2] : 0;
  return ind;
}

// ---------------------------------------------------------------------------

GeometryResolver::GeometryResolver(const transit::TransitNetwork* net,
                                   const roads::RoadGraph* roads)
    : net_(net), roads_(roads) {}

std::optional<std::pair<geo::LatLon, geo::LatLon>> GeometryResolver::resolve(
    const std::string& segment_id) const {
  if (segment_id.empty()) return std::nullopt;
  if (segment_id[0] == 'e' && roads_ != nullptr) {
    const auto id = csv::parse_int(segment_id.substr(1));
    if (!id) return std::nullopt;
    for (const auto& edge : roads_->edges) {
      if (edge.id == *id)
        return std::make_pair(roads_->nodes[static_cast<std::size_t>(edge.from)].pos,
                              roads_->nodes[static_cast<std::size_t>(edge.to)].pos);
    }
    return std::nullopt;
  }
  if ((segment_id.rfind("t:", 0) == 0 || segment_id.rfind("f:", 0) == 0) && net_ != nullptr) {
    const auto sep = segment_id.find('>', 2);
    if (sep == std::string::npos) return std::nullopt;
    const auto from = net_->stop_ids.find(segment_id.substr(2, sep - 2));
    const auto to = net_->stop_ids.find(segment_id.substr(sep + 1));
    if (from == net_->stop_ids.end() || to == net_->stop_ids.end()) return std::nullopt;
    return std::make_pair(net_->stops[static_cast<std::size_t>(from->second)].pos,
                          net_->stops[static_cast<std::size_t>(to->second)].pos);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

namespace {

std::string format_fixed(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6f", value);
  return buffer;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_error(errc::io_failure, "cannot open for writing: " + path);
  return out;
}

}  // namespace

void write_trips_csv(const std::vector<engine::TripRecord>& trips, const std::string& path) {
  auto out = open_out(path);
  out << "agent_id,trip_index,mode,depart_s,arrive_s,distance_m,emissions_g,late,status,"
         "segments\n";
  for (const auto& trip : trips) {
    out << trip.agent_id << ',' << trip.trip_index << ','
        << (trip.mode ? to_string(*trip.mode) : std::string_view{}) << ',' << trip.depart_s
        << ',' << trip.arrive_s << ',' << format_fixed(trip.distance_m) << ','
        << format_fixed(trip.emissions_g) << ',' << (trip.late ? 1 : 0) << ','
        << (trip.failed ? "failed" : "ok") << ',';
    for (std::size_t i = 0; i < trip.segments.size(); ++i) {
      if (i > 0) out << ';';
      out << trip.segments[i].id << '@' << trip.segments[i].entry_s;
    }
    out << '\n';
  }
  if (!out) throw_error(errc::io_failure, "write failed: " + path);
}

std::vector<engine::TripRecord> read_trips_csv(const std::string& path) {
  const auto table = csv::Table::read_file(path);
  const auto c_agent = table.column("agent_id");
  const auto c_index = table.column("trip_index");
  const auto c_mode = table.column("mode");
  const auto c_depart = table.column("depart_s");
  const auto c_arrive = table.column("arrive_s");
  const auto c_dist = table.column("distance_m");
  const auto c_em = table.column("emissions_g");
  const auto c_late = table.column("late");
  const auto c_status = table.column("status");
  const auto c_segments = table.column("segments");

  std::vector<engine::TripRecord> trips;
  for (const auto& row : table.rows()) {
    engine::TripRecord trip;
    const std::string where = path + ":" + std::to_string(row.line);
    const auto agent = csv::parse_int(table.field(row, c_agent));
    const auto index = csv::parse_int(table.field(row, c_index));
    const auto depart = csv::parse_int(table.field(row, c_depart));
    const auto arrive = csv::parse_int(table.field(row, c_arrive));
    const auto dist = csv::parse_double(table.field(row, c_dist));
    const auto em = csv::parse_double(table.field(row, c_em));
    if (!agent || !index || !depart || !arrive || !dist || !em)
      throw_error(errc::malformed_row, where + ": bad trip row");
    trip.agent_id = *agent;
    trip.trip_index = static_cast<int>(*index);
    trip.depart_s = static_cast<int>(*depart);
    trip.arrive_s = static_cast<int>(*arrive);
    trip.distance_m = *dist;
    trip.emissions_g = *em;
    trip.late = table.field(row, c_late) == "1";
    trip.failed = table.field(row, c_status) == "failed";
    if (const auto& mode = table.field(row, c_mode); !mode.empty())
      trip.mode = engine::mode_from(mode);

    const std::string& segments = table.field(row, c_segments);
    std::size_t start = 0;
    while (start < segments.size()) {
      auto end = segments.find(';', start);
      if (end == std::string::npos) end = segments.size();
      const std::string token = segments.substr(start, end - start);
      const auto at = token.rfind('@');
      const auto entry = at == std::string::npos
                             ? std::nullopt
                             : csv::parse_int(token.substr(at + 1));
      if (!entry) throw_error(errc::malformed_row, where + ": bad segment token");
      trip.segments.push_back(
          engine::Segment{token.substr(0, at), static_cast<int>(*entry)});
      start = end + 1;
    }
    trips.push_back(std::move(trip));
  }
  return trips;
}

void write_heatmap_geojson(const std::vector<HeatmapBin>& bins, const GeometryResolver& geometry,
                           int bin_width_s, const std::string& path) {
  ordered_json features = ordered_json::array();
  for (const auto& bin : bins) {
    const auto line = geometry.resolve(bin.segment_id);
    if (!line) continue;  // off-map segments carry no geometry
    ordered_json feature;
    feature["type"] = "Feature";
    feature["geometry"] = ordered_json{
        {"type", "LineString"},
        {"coordinates", ordered_json::array({ordered_json::array({line->first.lon,
                                                                  line->first.lat}),
                                             ordered_json::array({line->second.lon,
                                                                  line->second.lat})})}};
    feature["properties"] = ordered_json{{"segment", bin.segment_id},
                                         {"mode", std::string(to_string(bin.mode))},
                                         {"hour", bin.bin * bin_width_s / 3600},
                                         {"bin", bin.bin},
                                         {"count", bin.count}};
    features.push_back(std::move(feature));
  }
  ordered_json collection;
  collection["type"] = "FeatureCollection";
  collection["features"] = std::move(features);

  auto out = open_out(path);
  out << collection.dump(2) << '\n';
  if (!out) throw_error(errc::io_failure, "write failed: " + path);
}

void write_indicators_json(const Indicators& ind, const std::string& path) {
  ordered_json j;
  j["trips"] = ind.trips;
  j["failed_trips"] = ind.failed_trips;
  j["empty"] = ind.empty;
  j["mode_shares"] = ordered_json{
      {"walk", ind.share_walk}, {"transit", ind.share_transit}, {"drive", ind.share_drive}};
  j["avg_distance_m"] = ordered_json{{"overall", ind.avg_distance_m},
                                     {"walk", ind.avg_distance_walk_m},
                                     {"transit", ind.avg_distance_transit_m},
                                     {"drive", ind.avg_distance_drive_m}};
  j["total_emissions_g"] = ind.total_emissions_g;

  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw_error(errc::io_failure, "write failed: " + path);
}

void export_outputs(const std::vector<engine::TripRecord>& trips,
                    const std::vector<HeatmapBin>& bins, const Indicators& indicators,
                    const std::vector<population::AgentProfile>& profiles,
                    const GeometryResolver& geometry, int bin_width_s,
                    const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw_error(errc::io_failure, "cannot create output directory: " + out_dir);

  write_trips_csv(trips, (fs::path(out_dir) / "trips.csv").string());
  write_heatmap_geojson(bins, geometry, bin_width_s,
                        (fs::path(out_dir) / "heatmap.geojson").string());
  write_indicators_json(indicators, (fs::path(out_dir) / "indicators.json").string());
  population::write_profiles_jsonl(profiles, (fs::path(out_dir) / "population.jsonl").string());
}

}  // namespace usim::io
