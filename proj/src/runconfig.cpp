#include "usim/runconfig.hpp"

#include <filesystem>
#include <fstream>

#include "usim/error.hpp"

namespace usim::io {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

RunConfig RunConfig::from_json(const json& j) {
  RunConfig cfg;
  const auto& paths = j.at("paths");
  cfg.paths.marginals = paths.value("marginals", "");
  cfg.paths.salary_bands = paths.value("salary_bands", "");
  cfg.paths.cells = paths.value("cells", "");
  cfg.paths.pois = paths.value("pois", "");
  cfg.paths.industries = paths.value("industries", "");
  cfg.paths.categories = paths.value("categories", "");
  cfg.paths.transit_dir = paths.value("transit_dir", "");
  cfg.paths.road_nodes = paths.value("road_nodes", "");
  cfg.paths.road_edges = paths.value("road_edges", "");
  cfg.paths.out_dir = paths.value("out_dir", "out");

  const auto& grid = j.at("grid");
  cfg.bbox = geo::BBox{grid.at("min_lat").get<double>(), grid.at("min_lon").get<double>(),
                       grid.at("max_lat").get<double>(), grid.at("max_lon").get<double>()};
  cfg.cell_size_m = grid.value("cell_size_m", 250.0);
  cfg.agents = j.value("agents", std::int64_t{1000});

  if (j.contains("provider")) {
    const auto& p = j["provider"];
    const std::string mode = p.value("mode", "stub");
    if (mode != "stub" && mode != "live")
      throw_error(errc::invalid_argument, "provider mode must be stub or live");
    cfg.provider.mode = mode == "live" ? providers::Mode::live : providers::Mode::stub;
    cfg.provider.endpoint_url = p.value("endpoint_url", "");
    cfg.provider.model_name = p.value("model_name", "");
    cfg.provider.timeout_s = p.value("timeout_s", 30.0);
    cfg.provider.max_retries = p.value("max_retries", 2);
    cfg.provider.stub_seed = p.value("stub_seed", std::uint64_t{0});
    cfg.provider.stub_perturbation = p.value("stub_perturbation", 0.1);
  }
  if (j.contains("huff")) {
    const auto& h = j["huff"];
    cfg.huff.decay = h.value("decay", 2.0);
    cfg.huff.min_distance_m = h.value("min_distance_m", 50.0);
    cfg.huff.candidate_radius_m = h.value("candidate_radius_m", 5000.0);
    cfg.huff.fallback_k = h.value("fallback_k", 10);
  }
  if (j.contains("sim")) {
    const auto& s = j["sim"];
    cfg.sim.master_seed = s.value("master_seed", std::uint64_t{42});
    if (s.contains("emission_factors_g_per_km")) {
      const auto& e = s["emission_factors_g_per_km"];
      cfg.sim.emissions.walk_g_per_km = e.value("walk", 0.0);
      cfg.sim.emissions.transit_g_per_km = e.value("transit", 68.0);
      cfg.sim.emissions.drive_g_per_km = e.value("drive", 192.0);
    }
    if (s.contains("utility")) {
      const auto& u = s["utility"];
      cfg.sim.utility.alpha = u.value("alpha", cfg.sim.utility.alpha);
      cfg.sim.utility.beta = u.value("beta", cfg.sim.utility.beta);
      cfg.sim.utility.gamma = u.value("gamma", cfg.sim.utility.gamma);
    }
    cfg.sim.walk_max_distance_m = s.value("walk_max_distance_m", 2000.0);
    cfg.sim.bin_width_s = s.value("bin_width_s", 3600);
    cfg.sim.workers = s.value("workers", 1);
    cfg.sim.walk_speed_mps = s.value("walk_speed_mps", 1.4);
    cfg.sim.max_rounds = s.value("max_rounds", 4);
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(errc::missing_file, "cannot open config: " + path);
  const auto parsed = json::parse(in, nullptr, false);
  if (parsed.is_discarded())
    throw_error(errc::invalid_argument, "config is not valid JSON: " + path);
  return from_json(parsed);
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["paths"] = ordered_json{{"marginals", paths.marginals},
                            {"salary_bands", paths.salary_bands},
                            {"cells", paths.cells},
                            {"pois", paths.pois},
                            {"industries", paths.industries},
                            {"categories", paths.categories},
                            {"transit_dir", paths.transit_dir},
                            {"road_nodes", paths.road_nodes},
                            {"road_edges", paths.road_edges},
                            {"out_dir", paths.out_dir}};
  j["grid"] = ordered_json{{"min_lat", bbox.min_lat},
                           {"min_lon", bbox.min_lon},
                           {"max_lat", bbox.max_lat},
                           {"max_lon", bbox.max_lon},
                           {"cell_size_m", cell_size_m}};
  j["agents"] = agents;
  j["provider"] =
      ordered_json{{"mode", provider.mode == providers::Mode::live ? "live" : "stub"},
                   {"endpoint_url", provider.endpoint_url},
                   {"model_name", provider.model_name},
                   {"timeout_s", provider.timeout_s},
                   {"max_retries", provider.max_retries},
                   {"stub_seed", provider.stub_seed},
                   {"stub_perturbation", provider.stub_perturbation}};
  j["huff"] = ordered_json{{"decay", huff.decay},
                           {"min_distance_m", huff.min_distance_m},
                           {"candidate_radius_m", huff.candidate_radius_m},
                           {"fallback_k", huff.fallback_k}};
  j["sim"] = ordered_json{
      {"master_seed", sim.master_seed},
      {"emission_factors_g_per_km",
       ordered_json{{"walk", sim.emissions.walk_g_per_km},
                    {"transit", sim.emissions.transit_g_per_km},
                    {"drive", sim.emissions.drive_g_per_km}}},
      {"utility", ordered_json{{"alpha", sim.utility.alpha},
                               {"beta", sim.utility.beta},
                               {"gamma", sim.utility.gamma}}},
      {"walk_max_distance_m", sim.walk_max_distance_m},
      {"bin_width_s", sim.bin_width_s},
      {"workers", sim.workers},
      {"walk_speed_mps", sim.walk_speed_mps},
      {"max_rounds", sim.max_rounds}};
  return j;
}

void RunConfig::validate() const {
  for (const std::string* path :
       {&paths.marginals, &paths.salary_bands, &paths.cells, &paths.pois, &paths.industries,
        &paths.categories, &paths.transit_dir, &paths.road_nodes, &paths.road_edges}) {
    if (!path->empty() && !fs::exists(*path))
      throw_error(errc::missing_file, "configured input does not exist: " + *path);
  }
  provider.validate();
  huff.validate();
  sim.emissions.validate();
}

}  // namespace usim::io
