#pragma once

#include <string>

#include <json.hpp>

#include "usim/engine.hpp"
#include "usim/geo.hpp"
#include "usim/providers.hpp"
#include "usim/schedule.hpp"

namespace usim::io {

struct RunConfig {
  struct Paths {
    std::string marginals, salary_bands, cells, pois, industries, categories;
    std::string transit_dir, road_nodes, road_edges;
    std::string out_dir = "out";
  } paths;

  geo::BBox bbox;
  double cell_size_m = 250;
  std::int64_t agents = 1000;

  providers::ProviderConfig provider;
  schedule::HuffParams huff;
  engine::SimulationConfig sim;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::string& path);
  nlohmann::ordered_json to_json() const;

  void validate() const;  // referenced input paths exist
};

}  // namespace usim::io
