#pragma once

#include <memory>
#include <string>
#include <vector>

#include "usim/engine.hpp"
#include "usim/ingest.hpp"
#include "usim/runconfig.hpp"

namespace usim::pipeline {

// immutable world shared by the simulation stages
struct World {
  geography::Grid grid;
  std::unique_ptr<geography::PoiIndex> pois;
  geography::IndustryCatalog industries;
  schedule::CategoryCatalog categories;
  transit::TransitNetwork net;
  roads::RoadGraph roads;
  geo::Projection proj;

  engine::World engine_view() const;
};

World load_world(const io::RunConfig& config);

void write_schedules_jsonl(const std::vector<schedule::DailySchedule>& schedules,
                           const std::string& path);
std::vector<schedule::DailySchedule> read_schedules_jsonl(const std::string& path);

// pipeline stages; intermediate artifacts live under config.paths.out_dir
void run_synth(const io::RunConfig& config);     // -> population.jsonl
void run_allocate(const io::RunConfig& config);  // population.jsonl gains home/routine
void run_schedule(const io::RunConfig& config);  // -> schedules.jsonl
void run_simulate(const io::RunConfig& config);  // -> trips.csv
void run_export(const io::RunConfig& config);    // -> heatmap.geojson, indicators.json
void run_all(const io::RunConfig& config);

}  // namespace usim::pipeline
