#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "usim/error.hpp"
#include "usim/fixtures.hpp"
#include "usim/pipeline.hpp"
#include "usim/runconfig.hpp"

namespace {

struct GlobalOpts {
  std::string config_path;
  std::int64_t seed = -1;
  std::int64_t agents = -1;
  int workers = -1;
  bool stub_llm = false;
};

usim::io::RunConfig load_config(const GlobalOpts& opts) {
  if (opts.config_path.empty())
    usim::throw_error(usim::errc::invalid_argument, "--config PATH is required for this command");
  auto config = usim::io::RunConfig::from_file(opts.config_path);
  if (opts.seed >= 0) config.sim.master_seed = static_cast<std::uint64_t>(opts.seed);
  if (opts.agents >= 0) config.agents = opts.agents;
  if (opts.workers > 0) config.sim.workers = opts.workers;
  if (opts.stub_llm) config.provider.mode = usim::providers::Mode::stub;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"usim: synthetic-population urban mobility simulator"};
  app.require_subcommand(1);

  GlobalOpts opts;
  app.add_option("--config", opts.config_path, "run configuration JSON");
  app.add_option("--seed", opts.seed, "override the simulation master seed");
  app.add_option("--agents", opts.agents, "override the agent count");
  app.add_option("--workers", opts.workers, "override the simulation worker count");
  app.add_flag("--stub-llm", opts.stub_llm, "force the deterministic offline LLM stub");

  auto* synth = app.add_subcommand("synth", "fit the joint distribution and sample profiles");
  auto* allocate = app.add_subcommand("allocate", "assign home cells and routine POIs");
  auto* schedule = app.add_subcommand("schedule", "generate daily activity schedules");
  auto* simulate = app.add_subcommand("simulate", "route every trip of the simulated day");
  auto* exportv = app.add_subcommand("export", "write heat map and indicator files");
  auto* run_all = app.add_subcommand("run-all", "all stages in order");

  auto* fixture = app.add_subcommand("make-fixture", "write a synthetic demo dataset");
  std::string fixture_dir = "fixture";
  usim::fixtures::FixtureSpec fixture_spec;
  fixture->add_option("--out", fixture_dir, "target directory");
  fixture->add_option("--rows", fixture_spec.grid_rows, "grid rows");
  fixture->add_option("--cols", fixture_spec.grid_cols, "grid cols");
  fixture->add_option("--pois", fixture_spec.poi_count, "POI count");
  fixture->add_option("--capacity", fixture_spec.capacity_per_cell, "capacity per cell");
  fixture->add_option("--fixture-seed", fixture_spec.seed, "fixture generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fixture->parsed()) {
      const auto config_path = usim::fixtures::write_fixture(fixture_dir, fixture_spec);
      std::cout << "fixture written; config at " << config_path << "\n";
      return 0;
    }
    const auto config = load_config(opts);
    if (synth->parsed()) usim::pipeline::run_synth(config);
    if (allocate->parsed()) usim::pipeline::run_allocate(config);
    if (schedule->parsed()) usim::pipeline::run_schedule(config);
    if (simulate->parsed()) usim::pipeline::run_simulate(config);
    if (exportv->parsed()) usim::pipeline::run_export(config);
    if (run_all->parsed()) usim::pipeline::run_all(config);
    return 0;
  } catch (const usim::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 2;
  }
}
