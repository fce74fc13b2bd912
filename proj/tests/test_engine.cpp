#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "usim/engine.hpp"
#include "usim/error.hpp"
#include "usim/fixtures.hpp"
#include "usim/pipeline.hpp"

using namespace usim;
using namespace usim::engine;

namespace {

// one shared desk-scale world for the engine tests
struct TestWorld {
  io::RunConfig config;
  pipeline::World world;

  TestWorld() {
    const auto dir = std::filesystem::temp_directory_path() / "usim_engine_fixture";
    fixtures::FixtureSpec spec;
    const auto config_path = fixtures::write_fixture(dir.string(), spec);
    config = io::RunConfig::from_file(config_path);
    world = pipeline::load_world(config);
  }
};

TestWorld& shared_world() {
  static TestWorld w;
  return w;
}

population::AgentProfile office_agent(const pipeline::World& world) {
  population::AgentProfile p;
  p.agent_id = 0;
  p.occupation = "software engineer";
  p.mode_prefs = {0.25, 0.45, 0.30};
  p.home_cell_id = 21;  // somewhere in the SW of the grid
  // first POI with an industry, used as the routine anchor
  for (const auto& poi : world.pois->pois()) {
    if (!poi.industry.empty()) {
      p.routine_poi_id = poi.poi_id;
      break;
    }
  }
  return p;
}

}  // namespace

TEST_CASE("choose_mode: identical origin and destination degenerates to walking") {
  auto& tw = shared_world();
  const auto agent = office_agent(tw.world);
  const geo::LatLon here = tw.world.grid.cell(21).centroid;
  const auto routed =
      choose_mode(tw.world.engine_view(), agent, here, here, 30000, tw.config.sim);
  CHECK(routed.mode == Mode::walk);
  CHECK(routed.distance_m == 0);
  CHECK(routed.duration_s == 0);
}

TEST_CASE("choose_mode picks the only feasible candidate") {
  // a world with roads only (no transit stops near): distant trip -> drive
  auto& tw = shared_world();
  auto view = tw.world.engine_view();
  transit::TransitNetwork empty_net;
  view.net = &empty_net;

  const auto agent = office_agent(tw.world);
  const geo::LatLon from = tw.world.grid.cell(0).centroid;
  const geo::LatLon to = tw.world.grid.cell(399).centroid;  // ~7 km away: walking infeasible
  const auto routed = choose_mode(view, agent, from, to, 30000, tw.config.sim);
  CHECK(routed.mode == Mode::drive);
  CHECK(routed.distance_m > tw.config.sim.walk_max_distance_m);
}

TEST_CASE("choose_mode utility argmax matches hand arithmetic") {
  // micro-world: origin and destination 900 m apart, one direct trip, so the
  // three candidates come out exactly:
  //   walk    900 m in 642.857 s, walk 900 m
  //   drive   900 m in 100 s
  //   transit departs +60 s, arrives +180 s, no access/egress walking
  const geo::Projection proj(25.0);
  const geo::LatLon a{25.0, 121.5};
  const geo::LatLon b = proj.offset(a, 900, 0);

  geography::Grid grid = geography::build_grid(
      geo::BBox{24.999, 121.499, 25.002, 121.52}, 250);
  geography::PoiIndex pois{{}};

  roads::RoadGraph roadnet;
  roadnet.nodes = {{0, a}, {1, b}};
  roadnet.edges = {{0, 0, 1, 900, 1.4, 9.0}, {1, 1, 0, 900, 1.4, 9.0}};
  roadnet.finalize();

  transit::TransitNetwork net;
  net.stops = {{"S0", "S0", a}, {"S1", "S1", b}};
  transit::Route route;
  route.id = "T";
  route.stops = {0, 1};
  route.trips = {0};
  net.trips = {transit::Trip{"T0", 0, {{30060, 30060}, {30180, 30180}}}};
  net.routes = {route};
  net.footpaths_from.assign(2, {});
  net.finalize();

  World world;
  world.grid = &grid;
  world.pois = &pois;
  world.net = &net;
  world.roads = &roadnet;
  world.proj = proj;

  SimulationConfig config;
  config.utility = {1.0, 0.5, 0.1};

  population::AgentProfile agent;
  // hand utilities at depart 30000 (max duration 642.857, max walk 900):
  //   walk    .2 - 1*(642.857/642.857) - .5*(900/900) = -1.300
  //   transit .5 - 1*(180/642.857)                    = +0.220
  //   drive   .3 - 1*(100/642.857)                    = +0.144
  agent.mode_prefs = {0.2, 0.5, 0.3};
  CHECK(choose_mode(world, agent, a, b, 30000, config).mode == Mode::transit);

  //   transit .2 - 0.280 = -0.080   drive .7 - 0.156 = +0.544
  agent.mode_prefs = {0.1, 0.2, 0.7};
  CHECK(choose_mode(world, agent, a, b, 30000, config).mode == Mode::drive);

  // slow drive + a much later transit departure makes walking the argmax:
  //   walk .8 - 642.857/3120 - .5 = +0.094   transit .1 - 1 = -0.9
  //   drive .1 - 1000/3120 = -0.221
  roadnet.edges[0].drive_speed_mps = 0.9;
  roadnet.edges[1].drive_speed_mps = 0.9;
  net.trips[0].events = {{33000, 33000}, {33120, 33120}};
  agent.mode_prefs = {0.8, 0.1, 0.1};
  CHECK(choose_mode(world, agent, a, b, 30000, config).mode == Mode::walk);
}

TEST_CASE("simulate_day: a single home activity produces zero trips") {
  auto& tw = shared_world();
  auto agent = office_agent(tw.world);
  schedule::DailySchedule sched;
  sched.agent_id = agent.agent_id;
  sched.activities = {{"home", schedule::LocationKind::home, {}, 0, 86400}};
  const auto trips =
      simulate_day(tw.world.engine_view(), {agent}, {sched}, tw.config.sim, tw.config.huff);
  CHECK(trips.empty());
}

TEST_CASE("simulate_day: office stub schedule yields three consistent trips") {
  auto& tw = shared_world();
  auto agent = office_agent(tw.world);

  auto sched = schedule::generate_schedule(agent, tw.config.provider);
  const auto categories = io::load_category_catalog(tw.config.paths.categories);
  schedule::resolve_activity_categories(sched, categories, tw.config.provider);

  const auto trips =
      simulate_day(tw.world.engine_view(), {agent}, {sched}, tw.config.sim, tw.config.huff);
  REQUIRE(trips.size() == 3);  // home->work, work->dinner, dinner->home

  // counting bound: at most activities-1 trips
  CHECK(trips.size() <= sched.activities.size() - 1);

  for (std::size_t i = 0; i < trips.size(); ++i) {
    const auto& t = trips[i];
    CHECK(t.agent_id == agent.agent_id);
    CHECK(t.trip_index == static_cast<int>(i));
    CHECK(!t.failed);
    CHECK(t.depart_s < t.arrive_s);
    // departs at the scheduled end of the preceding activity (no lateness here)
    CHECK(t.depart_s >= sched.activities[i].end_s);
    // emissions follow the configured factor exactly
    const double factor = tw.config.sim.emissions.factor(*t.mode);
    CHECK(t.emissions_g == (t.distance_m / 1000.0) * factor);
  }

  // temporal sanity: trip i+1 departs no earlier than trip i arrives
  for (std::size_t i = 1; i < trips.size(); ++i)
    CHECK(trips[i].depart_s >= trips[i - 1].arrive_s);

  // replay the first trip's mode choice independently
  const geo::LatLon home = tw.world.grid.cell(*agent.home_cell_id).centroid;
  const geo::LatLon work = tw.world.pois->by_id(*agent.routine_poi_id).pos;
  const auto replay = choose_mode(tw.world.engine_view(), agent, home, work,
                                  sched.activities[0].end_s, tw.config.sim);
  CHECK(*trips[0].mode == replay.mode);
  CHECK(trips[0].distance_m == replay.distance_m);
  CHECK(trips[0].arrive_s - trips[0].depart_s ==
        static_cast<int>(std::ceil(replay.duration_s - 1e-9)));
}

TEST_CASE("simulate_day is deterministic and partition-invariant") {
  auto& tw = shared_world();

  std::vector<population::AgentProfile> agents;
  std::vector<schedule::DailySchedule> schedules;
  const auto categories = io::load_category_catalog(tw.config.paths.categories);
  const char* occupations[] = {"software engineer", "student", "retired", "bus driver",
                               "retail sales"};
  for (int i = 0; i < 25; ++i) {
    auto agent = office_agent(tw.world);
    agent.agent_id = i;
    agent.occupation = occupations[i % 5];
    agent.home_cell_id = (i * 37) % 400;
    auto sched = schedule::generate_schedule(agent, tw.config.provider);
    schedule::resolve_activity_categories(sched, categories, tw.config.provider);
    agents.push_back(agent);
    schedules.push_back(std::move(sched));
  }

  auto config = tw.config.sim;
  config.workers = 1;
  const auto single = simulate_day(tw.world.engine_view(), agents, schedules, config,
                                   tw.config.huff);
  const auto single_again = simulate_day(tw.world.engine_view(), agents, schedules, config,
                                         tw.config.huff);
  config.workers = 8;
  const auto parallel = simulate_day(tw.world.engine_view(), agents, schedules, config,
                                     tw.config.huff);

  auto equal = [](const std::vector<TripRecord>& a, const std::vector<TripRecord>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].agent_id != b[i].agent_id || a[i].trip_index != b[i].trip_index ||
          a[i].mode != b[i].mode || a[i].depart_s != b[i].depart_s ||
          a[i].arrive_s != b[i].arrive_s || a[i].distance_m != b[i].distance_m ||
          a[i].emissions_g != b[i].emissions_g || a[i].late != b[i].late ||
          a[i].failed != b[i].failed || !(a[i].segments == b[i].segments))
        return false;
    }
    return true;
  };
  CHECK(equal(single, single_again));
  CHECK(equal(single, parallel));
}

TEST_CASE("nonzero walk emission factors are rejected") {
  EmissionFactors factors;
  factors.walk_g_per_km = 5;
  CHECK_THROWS_AS(factors.validate(), error);
}
