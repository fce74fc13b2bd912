#include "usim/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "usim/error.hpp"
#include "usim/outputs.hpp"
#include "usim/rng.hpp"

namespace usim::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

engine::World World::engine_view() const {
  engine::World view;
  view.grid = &grid;
  view.pois = pois.get();
  view.net = &net;
  view.roads = &roads;
  view.proj = proj;
  return view;
}

World load_world(const io::RunConfig& config) {
  World world;
  world.grid = geography::build_grid(config.bbox, config.cell_size_m);
  world.proj = world.grid.spec.projection();
  io::load_cells(config.paths.cells, world.grid);
  world.pois = std::make_unique<geography::PoiIndex>(io::load_pois(config.paths.pois));
  world.industries = io::load_industry_catalog(config.paths.industries);
  world.categories = io::load_category_catalog(config.paths.categories);
  world.net = io::ingest_transit_feed(config.paths.transit_dir, nullptr, &world.proj);
  world.roads = io::load_road_graph(config.paths.road_nodes, config.paths.road_edges);
  return world;
}

namespace {

fs::path out_path(const io::RunConfig& config, const char* file) {
  return fs::path(config.paths.out_dir) / file;
}

void ensure_out_dir(const io::RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.paths.out_dir, ec);
  if (ec)
    throw_error(errc::io_failure, "cannot create output directory: " + config.paths.out_dir);
}

}  // namespace

void write_schedules_jsonl(const std::vector<schedule::DailySchedule>& schedules,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_error(errc::io_failure, "cannot open for writing: " + path);
  for (const auto& sched : schedules) {
    ordered_json activities = ordered_json::array();
    for (const auto& act : sched.activities) {
      ordered_json a;
      a["label"] = act.label;
      a["kind"] = std::string(to_string(act.kind));
      a["poi_category"] =
          act.poi_category ? ordered_json(*act.poi_category) : ordered_json(nullptr);
      a["start_s"] = act.start_s;
      a["end_s"] = act.end_s;
      activities.push_back(std::move(a));
    }
    out << ordered_json{{"agent_id", sched.agent_id}, {"activities", activities}}.dump()
        << '\n';
  }
  if (!out) throw_error(errc::io_failure, "write failed: " + path);
}

std::vector<schedule::DailySchedule> read_schedules_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(errc::missing_file, "cannot open: " + path);
  std::vector<schedule::DailySchedule> schedules;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded())
      throw_error(errc::malformed_row, path + ":" + std::to_string(line_no) + ": not JSON");
    schedule::DailySchedule sched;
    sched.agent_id = parsed.at("agent_id").get<std::int64_t>();
    for (const auto& a : parsed.at("activities")) {
      schedule::Activity act;
      act.label = a.at("label").get<std::string>();
      act.kind = schedule::location_kind_from(a.at("kind").get<std::string>());
      if (!a.at("poi_category").is_null())
        act.poi_category = a["poi_category"].get<std::string>();
      act.start_s = a.at("start_s").get<int>();
      act.end_s = a.at("end_s").get<int>();
      sched.activities.push_back(std::move(act));
    }
    schedules.push_back(std::move(sched));
  }
  return schedules;
}

// ---------------------------------------------------------------------------

void run_synth(const io::RunConfig& config) {
  ensure_out_dir(config);
  const auto marginals = io::load_marginals(config.paths.marginals);
  const auto bands = io::load_salary_bands(config.paths.salary_bands);
  const auto seed = population::seed_joint_from_llm(marginals, config.provider);
  const auto joint = population::ipf_fit(seed, marginals);
  const auto profiles =
      population::sample_profiles(joint, config.agents, bands, config.sim.master_seed);
  population::write_profiles_jsonl(profiles, out_path(config, "population.jsonl").string());
}

void run_allocate(const io::RunConfig& config) {
  auto profiles =
      population::read_profiles_jsonl(out_path(config, "population.jsonl").string());

  auto grid = geography::build_grid(config.bbox, config.cell_size_m);
  io::load_cells(config.paths.cells, grid);
  const geography::PoiIndex pois(io::load_pois(config.paths.pois));
  const auto industries = io::load_industry_catalog(config.paths.industries);

  const auto homes = geography::allocate_homes(profiles, grid.cells);
  for (std::size_t i = 0; i < profiles.size(); ++i) profiles[i].home_cell_id = homes[i];

  std::map<std::string, std::string> industry_cache;  // occupation matching is pure
  for (auto& profile : profiles) {
    auto it = industry_cache.find(profile.occupation);
    if (it == industry_cache.end()) {
      it = industry_cache
               .emplace(profile.occupation,
                        geography::match_industry(profile.occupation, industries,
                                                  config.provider))
               .first;
    }
    auto stream = rng::derive_stream(config.sim.master_seed,
                                     static_cast<std::uint64_t>(profile.agent_id), "routine");
    profile.routine_poi_id = geography::assign_routine(profile, it->second, pois, stream);
  }
  population::write_profiles_jsonl(profiles, out_path(config, "population.jsonl").string());
}

void run_schedule(const io::RunConfig& config) {
  const auto profiles =
      population::read_profiles_jsonl(out_path(config, "population.jsonl").string());
  const auto categories = io::load_category_catalog(config.paths.categories);

  std::vector<schedule::DailySchedule> schedules;
  schedules.reserve(profiles.size());
  for (const auto& profile : profiles) {
    auto sched = schedule::generate_schedule(profile, config.provider);
    schedule::resolve_activity_categories(sched, categories, config.provider);
    schedules.push_back(std::move(sched));
  }
  write_schedules_jsonl(schedules, out_path(config, "schedules.jsonl").string());
}

void run_simulate(const io::RunConfig& config) {
  const auto profiles =
      population::read_profiles_jsonl(out_path(config, "population.jsonl").string());
  const auto schedules = read_schedules_jsonl(out_path(config, "schedules.jsonl").string());
  const auto world = load_world(config);

  const auto trips =
      engine::simulate_day(world.engine_view(), profiles, schedules, config.sim, config.huff);
  io::write_trips_csv(trips, out_path(config, "trips.csv").string());
}

void run_export(const io::RunConfig& config) {
  const auto profiles =
      population::read_profiles_jsonl(out_path(config, "population.jsonl").string());
  const auto trips = io::read_trips_csv(out_path(config, "trips.csv").string());
  const auto world = load_world(config);

  const auto bins = io::accumulate_heatmap(trips, config.sim.bin_width_s);
  const auto indicators = io::compute_indicators(trips, config.sim.emissions);
  const io::GeometryResolver geometry(&world.net, &world.roads);
  io::export_outputs(trips, bins, indicators, profiles, geometry, config.sim.bin_width_s,
                     config.paths.out_dir);
}

void run_all(const io::RunConfig& config) {
  run_synth(config);
  run_allocate(config);
  run_schedule(config);
  run_simulate(config);
  run_export(config);
}

}  // namespace usim::pipeline
