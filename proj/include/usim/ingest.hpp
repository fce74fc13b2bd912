#pragma once

#include <string>
#include <vector>

#include "usim/geography.hpp"
#include "usim/population.hpp"
#include "usim/roads.hpp"
#include "usim/schedule.hpp"
#include "usim/transit.hpp"

namespace usim::io {

// Row-level accounting: every input row is either accepted or listed here,
// with its file and line.
struct IngestReport {
  struct Rejection {
    std::string file;
    int line = 0;
    std::string reason;
  };

  std::size_t total_rows = 0;
  std::size_t accepted_rows = 0;
  std::vector<Rejection> rejections;

  void accept() {
    ++total_rows;
    ++accepted_rows;
  }
  void reject(std::string file, int line, std::string reason) {
    ++total_rows;
    rejections.push_back(Rejection{std::move(file), line, std::move(reason)});
  }
};

// columns: attribute_id,category,count — one marginal per attribute_id,
// categories in file order
std::vector<population::MarginalTable> load_marginals(const std::string& path);

// columns: income_band,min_monthly,max_monthly
population::SalaryBands load_salary_bands(const std::string& path);

// columns: cell_id,row,col,capacity,avg_income — merged into the built grid
void load_cells(const std::string& path, geography::Grid& grid);

// columns: poi_id,name,category,industry,lat,lon,popularity,credibility
std::vector<geography::Poi> load_pois(const std::string& path);

// columns: industry,description
geography::IndustryCatalog load_industry_catalog(const std::string& path);

// columns: category,description
schedule::CategoryCatalog load_category_catalog(const std::string& path);

// nodes.csv: node_id,lat,lon   edges.csv: edge_id,from,to,length_m,walk_speed,drive_speed
roads::RoadGraph load_road_graph(const std::string& nodes_path, const std::string& edges_path);

// GTFS-subset directory: stops.txt, routes.txt, trips.txt, stop_times.txt,
// transfers.txt. Trips with nonmonotonic times are rejected row-wise; routes
// whose trips overtake are split into separate internal routes. Footpath
// durations come from min_transfer_time, lengths from stop geometry under
// `proj` (stop-bbox midpoint latitude when null).
transit::TransitNetwork ingest_transit_feed(const std::string& directory,
                                            IngestReport* report = nullptr,
                                            const geo::Projection* proj = nullptr);

}  // namespace usim::io
