#include "usim/fixtures.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "usim/error.hpp"
#include "usim/geo.hpp"
#include "usim/rng.hpp"
#include "usim/runconfig.hpp"

namespace usim::fixtures {

namespace fs = std::filesystem;

namespace {

std::ofstream open(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_error(errc::io_failure, "cannot write fixture file: " + path.string());
  return out;
}

std::string coord(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.8f", v);
  return buffer;
}

std::string gtfs_time(int seconds) {
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "%02d:%02d:%02d", seconds / 3600, (seconds / 60) % 60,
                seconds % 60);
  return buffer;
}

}  // namespace

std::string write_fixture(const std::string& directory, const FixtureSpec& spec) {
  const fs::path dir(directory);
  fs::create_directories(dir);
  fs::create_directories(dir / "transit");

  // bbox sized for exactly grid_rows x grid_cols cells of 250 m (extent held
  // just under the cell multiple so ceil() cannot add a row)
  const double extent_y = spec.grid_rows * 250.0 - 1.0;
  const double extent_x = spec.grid_cols * 250.0 - 1.0;
  const double min_lat = 25.00, min_lon = 121.50;
  const double dlat = extent_y / geo::kMetersPerDegree;
  const double mid_lat = min_lat + dlat / 2;
  const geo::Projection proj(mid_lat);
  const double dlon = extent_x / proj.meters_per_lon_degree();
  const geo::LatLon origin{min_lat, min_lon};

  const auto at_xy = [&](double x, double y) { return proj.offset(origin, x, y); };

  // --- cells ---------------------------------------------------------------
  {
    auto out = open(dir / "cells.csv");
    out << "cell_id,row,col,capacity,avg_income\n";
    for (int row = 0; row < spec.grid_rows; ++row) {
      for (int col = 0; col < spec.grid_cols; ++col) {
        const long long id = static_cast<long long>(row) * spec.grid_cols + col;
        const long long income = 30000 + row * 1500 + col * 400;
        out << id << ',' << row << ',' << col << ',' << spec.capacity_per_cell << ','
            << income << '\n';
      }
    }
  }

  // --- marginals & salary bands ---------------------------------------------
  {
    auto out = open(dir / "marginals.csv");
    out << "attribute_id,category,count\n";
    const double t = static_cast<double>(spec.population_total);
    const auto row = [&](const char* attr, const char* cat, double share) {
      out << attr << ',' << cat << ',' << static_cast<long long>(t * share + 0.5) << '\n';
    };
    row("age_band", "18-29", 0.22);
    row("age_band", "30-44", 0.30);
    row("age_band", "45-64", 0.28);
    row("age_band", "65plus", 0.20);
    row("education", "secondary", 0.35);
    row("education", "bachelor", 0.45);
    row("education", "graduate", 0.20);
    row("occupation", "software engineer", 0.18);
    row("occupation", "school teacher", 0.14);
    row("occupation", "retail sales", 0.17);
    row("occupation", "student", 0.16);
    row("occupation", "retired", 0.20);
    row("occupation", "bus driver", 0.15);
    row("income_band", "low", 0.30);
    row("income_band", "mid", 0.40);
    row("income_band", "high", 0.22);
    row("income_band", "top", 0.08);
  }
  {
    auto out = open(dir / "salary_bands.csv");
    out << "income_band,min_monthly,max_monthly\n";
    out << "low,20000,35000\n";
    out << "mid,35000,60000\n";
    out << "high,60000,100000\n";
    out << "top,100000,250000\n";
  }

  // --- catalogs ---------------------------------------------------------------
  {
    auto out = open(dir / "industries.csv");
    out << "industry,description\n";
    out << "Education,schools teaching students classrooms lessons education learning\n";
    out << "Technology,software engineering computing programming technology systems\n";
    out << "Retail,retail stores shops sales merchandise customers shopping\n";
    out << "Transport,buses driving transport vehicles logistics passengers roads\n";
    out << "Finance,banking insurance investment accounting finance money\n";
    out << "FoodService,restaurants kitchens cooking meals food service dining\n";
  }
  {
    auto out = open(dir / "categories.csv");
    out << "category,description\n";
    out << "restaurant,restaurant dining dinner meals food eating\n";
    out << "cafe,cafe coffee snack snacks tea pastries\n";
    out << "market,market groceries fresh produce stalls market trip\n";
    out << "park,park green space walking trees outdoor walk in the park\n";
    out << "gym,gym fitness exercise training workout\n";
    out << "school,school classrooms education teaching\n";
    out << "office,office workplace business desks\n";
    out << "shop,shop retail store merchandise\n";
    out << "depot,bus depot terminal garage vehicles\n";
  }

  // --- POIs -------------------------------------------------------------------
  {
    struct Category {
      const char* name;
      const char* industry;
      int weight;
    };
    static const std::vector<Category> categories = {
        {"restaurant", "FoodService", 10}, {"cafe", "FoodService", 6},
        {"market", "Retail", 5},           {"park", "", 4},
        {"gym", "", 3},                    {"school", "Education", 4},
        {"office", "Technology", 6},       {"office", "Finance", 3},
        {"shop", "Retail", 6},             {"depot", "Transport", 3}};
    int weight_total = 0;
    for (const auto& c : categories) weight_total += c.weight;

    auto out = open(dir / "pois.csv");
    out << "poi_id,name,category,industry,lat,lon,popularity,credibility\n";
    auto stream = rng::derive_stream(spec.seed, 0, "pois");
    for (int i = 0; i < spec.poi_count; ++i) {
      const int ticket = i % weight_total;
      int acc = 0;
      const Category* cat = &categories.back();
      for (const auto& c : categories) {
        acc += c.weight;
        if (ticket < acc) {
          cat = &c;
          break;
        }
      }
      const double x = stream.next_double(0.0, extent_x);
      const double y = stream.next_double(0.0, extent_y);
      const auto pos = at_xy(x, y);
      const double popularity = stream.next_double(0.3, 1.0);
      const double credibility = stream.next_double(0.3, 1.0);
      out << i << ',' << cat->name << '-' << i << ',' << cat->name << ',' << cat->industry
          << ',' << coord(pos.lat) << ',' << coord(pos.lon) << ',' << coord(popularity) << ','
          << coord(credibility) << '\n';
    }
  }

  // --- transit feed ------------------------------------------------------------
  {
    struct StopDef {
      std::string id;
      double x, y;
    };
    std::vector<StopDef> stops;
    for (int i = 0; i < 6; ++i)
      stops.push_back({"EW" + std::to_string(i), i * 1000.0, 2500.0});
    for (int i = 0; i < 6; ++i)
      stops.push_back({"NS" + std::to_string(i), 2500.0, i * 1000.0});
    for (int i = 0; i < 5; ++i)
      stops.push_back({"D" + std::to_string(i), 500.0 + i * 1000.0, 500.0 + i * 1000.0});

    auto out_stops = open(dir / "transit" / "stops.txt");
    out_stops << "stop_id,stop_name,stop_lat,stop_lon\n";
    for (const auto& s : stops) {
      const auto pos = at_xy(s.x, s.y);
      out_stops << s.id << ',' << s.id << ',' << coord(pos.lat) << ',' << coord(pos.lon)
                << '\n';
    }

    auto out_routes = open(dir / "transit" / "routes.txt");
    out_routes << "route_id,route_long_name\n";
    out_routes << "R1,east-west\nR2,north-south\nR3,diagonal\n";

    auto out_trips = open(dir / "transit" / "trips.txt");
    out_trips << "route_id,trip_id\n";
    auto out_times = open(dir / "transit" / "stop_times.txt");
    out_times << "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n";

    const auto emit_route = [&](const std::string& route, const char* prefix, int stop_count,
                                int first_dep, int last_dep, int headway, int hop_s) {
      int trip_no = 0;
      for (int dep = first_dep; dep <= last_dep; dep += headway, ++trip_no) {
        const std::string trip_id = route + "_" + std::to_string(trip_no);
        out_trips << route << ',' << trip_id << '\n';
        for (int s = 0; s < stop_count; ++s) {
          const int t = dep + s * hop_s;
          out_times << trip_id << ',' << gtfs_time(t) << ',' << gtfs_time(t) << ','
                    << prefix << s << ',' << s + 1 << '\n';
        }
      }
    };
    emit_route("R1", "EW", 6, 6 * 3600, 22 * 3600, 1200, 180);
    emit_route("R2", "NS", 6, 6 * 3600 + 600, 22 * 3600, 1200, 180);
    emit_route("R3", "D", 5, 6 * 3600 + 300, 21 * 3600 + 2100, 1800, 240);

    auto out_transfers = open(dir / "transit" / "transfers.txt");
    out_transfers << "from_stop_id,to_stop_id,transfer_type,min_transfer_time\n";
    const auto link = [&](const char* a, const char* b, int seconds) {
      out_transfers << a << ',' << b << ",2," << seconds << '\n';
      out_transfers << b << ',' << a << ",2," << seconds << '\n';
    };
    link("EW2", "NS2", 600);
    link("EW3", "NS3", 600);
    link("EW2", "D2", 420);
    link("NS2", "D2", 420);
    link("NS3", "D2", 420);
  }

  // --- road grid -----------------------------------------------------------------
  {
    const int n = 9;  // 9x9 lattice, 625 m spacing: everything snaps within 500 m
    const double spacing = 5000.0 / (n - 1);
    auto out_nodes = open(dir / "nodes.csv");
    out_nodes << "node_id,lat,lon\n";
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const auto pos = at_xy(c * spacing, r * spacing);
        out_nodes << r * n + c << ',' << coord(pos.lat) << ',' << coord(pos.lon) << '\n';
      }
    }

    auto out_edges = open(dir / "edges.csv");
    out_edges << "edge_id,from,to,length_m,walk_speed,drive_speed\n";
    int edge_id = 0;
    const auto emit = [&](int a, int b, bool avenue) {
      const double drive = avenue ? 13.89 : 8.33;
      out_edges << edge_id++ << ',' << a << ',' << b << ',' << coord(spacing) << ",1.4,"
                << drive << '\n';
      out_edges << edge_id++ << ',' << b << ',' << a << ',' << coord(spacing) << ",1.4,"
                << drive << '\n';
    };
    for (int r = 0; r < n; ++r)
      for (int c = 0; c + 1 < n; ++c) emit(r * n + c, r * n + c + 1, r == n / 2);
    for (int r = 0; r + 1 < n; ++r)
      for (int c = 0; c < n; ++c) emit(r * n + c, (r + 1) * n + c, c == n / 2);
  }

  // --- ready-to-run config ----------------------------------------------------------
  io::RunConfig cfg;
  cfg.paths.marginals = (dir / "marginals.csv").string();
  cfg.paths.salary_bands = (dir / "salary_bands.csv").string();
  cfg.paths.cells = (dir / "cells.csv").string();
  cfg.paths.pois = (dir / "pois.csv").string();
  cfg.paths.industries = (dir / "industries.csv").string();
  cfg.paths.categories = (dir / "categories.csv").string();
  cfg.paths.transit_dir = (dir / "transit").string();
  cfg.paths.road_nodes = (dir / "nodes.csv").string();
  cfg.paths.road_edges = (dir / "edges.csv").string();
  cfg.paths.out_dir = (dir / "out").string();
  cfg.bbox = geo::BBox{min_lat, min_lon, min_lat + dlat, min_lon + dlon};
  cfg.cell_size_m = 250;
  cfg.agents = 1000;
  cfg.provider.stub_seed = spec.seed;
  cfg.sim.master_seed = 42;

  const fs::path config_path = dir / "config.json";
  auto out = open(config_path);
  out << cfg.to_json().dump(2) << '\n';
  return config_path.string();
}

}  // namespace usim::fixtures
