// Acceptance suite: one section per criterion, each printing a PASS/FAIL
// line. The process exits nonzero if any criterion fails.

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "support/oracles.hpp"
#include "usim/engine.hpp"
#include "usim/fixtures.hpp"
#include "usim/geography.hpp"
#include "usim/outputs.hpp"
#include "usim/pipeline.hpp"
#include "usim/population.hpp"
#include "usim/runconfig.hpp"
#include "usim/schedule.hpp"
#include "usim/transit.hpp"

using namespace usim;
namespace fs = std::filesystem;

namespace {

struct Check {
  int failures = 0;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      ++failures;
      notes.push_back(what);
    }
  }
  void note(const std::string& text) { notes.push_back(text); }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Pipeline runner: uses the CLI binary when USIM_CLI points at it, which
// exercises the exact external surface; falls back to the library otherwise.
int run_pipeline(const io::RunConfig& config, const fs::path& config_path, int workers,
                 std::int64_t agents) {
  io::RunConfig variant = config;
  variant.sim.workers = workers;
  variant.agents = agents;
  {
    std::ofstream out(config_path, std::ios::binary);
    out << variant.to_json().dump(2) << '\n';
  }
  if (const char* cli = std::getenv("USIM_CLI")) {
    const std::string command = std::string(cli) + " --config " + config_path.string() +
                                " run-all > /dev/null 2>&1";
    return std::system(command.c_str());
  }
  pipeline::run_all(variant);
  return 0;
}

// ---------------------------------------------------------------------------

void criterion_1_ipf_property(Check& check) {
  const auto start = std::chrono::steady_clock::now();
  rng::Stream stream(1001);
  for (int instance = 0; instance < 200; ++instance) {
    population::JointTable seed;
    seed.dims = {"a", "b", "c"};
    seed.labels = {{"a0", "a1", "a2", "a3"},
                   {"b0", "b1", "b2", "b3", "b4"},
                   {"c0", "c1", "c2"}};
    seed.shape = {4, 5, 3};
    seed.cells.resize(60);
    for (auto& c : seed.cells) c = stream.next_double(0.1, 10.0);
    seed.total = seed.mass();
    const std::vector<double> original = seed.cells;

    std::vector<population::MarginalTable> marginals;
    const double total = 1000;
    for (std::size_t d = 0; d < 3; ++d) {
      std::vector<double> counts(seed.shape[d]);
      double sum = 0;
      for (auto& c : counts) {
        c = stream.next_double(0.2, 1.0);
        sum += c;
      }
      double acc = 0;
      for (std::size_t i = 0; i + 1 < counts.size(); ++i) {
        counts[i] = total * counts[i] / sum;
        acc += counts[i];
      }
      counts.back() = total - acc;
      marginals.push_back(
          population::MarginalTable{seed.dims[d], seed.labels[d], counts, total});
    }

    const auto fitted = population::ipf_fit(seed, marginals, 1e-6, 1000);
    for (std::size_t d = 0; d < 3; ++d) {
      const auto projection = fitted.project(d);
      for (std::size_t cat = 0; cat < projection.size(); ++cat) {
        check.require(std::fabs(projection[cat] - marginals[d].counts[cat]) <=
                          1e-6 * marginals[d].counts[cat] * (1 + 1e-9),
                      "projection off-target in instance " + std::to_string(instance));
      }
    }
    for (std::size_t i = 0; i < original.size(); ++i)
      if (original[i] == 0.0)
        check.require(fitted.cells[i] == 0.0, "zero cell not preserved");
  }
  const double elapsed = seconds_since(start);
  check.note("200 instances in " + std::to_string(elapsed) + " s");
  check.require(elapsed < 2.0, "IPF property run exceeded 2 s");
}

void criterion_2_ipf_oracle(Check& check) {
  population::JointTable seed;
  seed.dims = {"rows", "cols"};
  seed.labels = {{"r0", "r1"}, {"c0", "c1"}};
  seed.shape = {2, 2};
  seed.cells = {1, 2, 3, 4};
  seed.total = 10;
  const auto fitted = population::ipf_fit(
      seed,
      {population::MarginalTable{"rows", {"r0", "r1"}, {10, 10}, 20},
       population::MarginalTable{"cols", {"c0", "c1"}, {8, 12}, 20}},
      1e-8, 1000);

  oracle::NaiveTable naive{{2, 2}, {1, 2, 3, 4}};
  naive = oracle::naive_ipf(naive, {{10, 10}, {8, 12}});
  for (int i = 0; i < 4; ++i) {
    check.require(std::fabs(fitted.cells[i] - naive.cells[i]) <= 1e-6,
                  "cell " + std::to_string(i) + " deviates from the naive IPF oracle");
  }
}

void criterion_3_mcraptor_oracle(Check& check) {
  const auto start = std::chrono::steady_clock::now();
  rng::Stream stream(3003);
  for (int instance = 0; instance < 200; ++instance) {
    const auto net = oracle::random_network(stream);
    const auto flat = oracle::flatten(net);
    const int n = static_cast<int>(net.stops.size());
    const auto origin = static_cast<transit::StopIdx>(stream.next_below(n));
    const auto target = static_cast<transit::StopIdx>(stream.next_below(n));
    const int depart = static_cast<int>(stream.next_below(4000));

    const auto bag = transit::mcraptor_query(net, origin, target, depart, 4);
    const auto expected = oracle::enumerate_single(flat, origin, target, depart, 4);

    std::set<std::tuple<int, int, double>> got, want;
    for (const auto& label : bag.labels())
      got.insert({label->crit.arrival_s, label->crit.trips, label->crit.walk_m});
    for (const auto& c : expected) want.insert({c.arr, c.trips, c.walk});
    check.require(got == want,
                  "criteria sets differ on instance " + std::to_string(instance));
  }
  const double elapsed = seconds_since(start);
  check.note("200 networks in " + std::to_string(elapsed) + " s");
  check.require(elapsed < 30.0, "McRAPTOR oracle run exceeded 30 s");
}

void criterion_4_range_consistency(Check& check) {
  rng::Stream stream(4004);
  int single_event_checks = 0;
  for (int instance = 0; instance < 200; ++instance) {
    const auto net = oracle::random_network(stream);
    const auto flat = oracle::flatten(net);
    const int n = static_cast<int>(net.stops.size());
    const auto origin = static_cast<transit::StopIdx>(stream.next_below(n));
    const auto target = static_cast<transit::StopIdx>(stream.next_below(n));

    // (a) a window whose only departure event is its right edge
    std::set<int> events;
    auto add_events = [&](transit::StopIdx stop, int walk_s) {
      for (const auto& [route_idx, pos] : net.routes_at[static_cast<std::size_t>(stop)])
        for (auto trip : net.routes[static_cast<std::size_t>(route_idx)].trips)
          events.insert(net.trips[static_cast<std::size_t>(trip)]
                            .events[static_cast<std::size_t>(pos)]
                            .departure_s -
                        walk_s);
    };
    add_events(origin, 0);
    for (const auto& fp : net.footpaths_from[static_cast<std::size_t>(origin)])
      add_events(fp.to, fp.duration_s);

    if (!events.empty()) {
      const int event = *events.begin();  // earliest: nothing below it
      if (event > 0) {
        const int t0 = std::max(0, event - 120);
        const auto range = transit::mcrange_query(net, origin, target, t0, event, 4);
        const auto single = transit::mcraptor_query(net, origin, target, event, 4);
        std::set<std::tuple<int, int, int, double>> got;
        for (const auto& rl : range)
          got.insert({rl.departure_s, rl.label->crit.arrival_s, rl.label->crit.trips,
                      rl.label->crit.walk_m});
        std::set<std::tuple<int, int, int, double>> want;
        for (const auto& label : single.labels())
          want.insert(
              {event, label->crit.arrival_s, label->crit.trips, label->crit.walk_m});
        check.require(got == want, "single-event window mismatch on instance " +
                                       std::to_string(instance));
        ++single_event_checks;
      }
    }

    // (b) an arbitrary multi-event window against the enumeration oracle
    const int t0 = static_cast<int>(stream.next_below(3000));
    const int t1 = t0 + static_cast<int>(stream.next_below(4000));
    const auto range = transit::mcrange_query(net, origin, target, t0, t1, 4);
    const auto expected = oracle::enumerate_range(flat, origin, target, t0, t1, 4);
    std::set<std::tuple<int, int, int, double>> got, want;
    for (const auto& rl : range)
      got.insert({rl.departure_s, rl.label->crit.arrival_s, rl.label->crit.trips,
                  rl.label->crit.walk_m});
    for (const auto& r : expected) want.insert({r.dep, r.c.arr, r.c.trips, r.c.walk});
    check.require(got == want,
                  "range front differs on instance " + std::to_string(instance));
  }
  check.note(std::to_string(single_event_checks) + " single-event windows exercised");
  check.require(single_event_checks > 50, "too few single-event windows in the corpus");
}

void criterion_5_huff(Check& check) {
  // three candidates at equal distance with attractiveness 0.1/0.2/0.7
  const geo::Projection proj(25.0);
  std::vector<geography::Poi> pois(3);
  const double atts[3] = {0.1, 0.2, 0.7};
  for (int i = 0; i < 3; ++i) {
    pois[static_cast<std::size_t>(i)].poi_id = i;
    pois[static_cast<std::size_t>(i)].category = "restaurant";
    pois[static_cast<std::size_t>(i)].popularity = atts[i];
    pois[static_cast<std::size_t>(i)].credibility = 1.0;
  }
  pois[0].pos = proj.offset({25.0, 121.5}, 1000, 0);
  pois[1].pos = proj.offset({25.0, 121.5}, -1000, 0);
  pois[2].pos = proj.offset({25.0, 121.5}, 0, 1000);
  const geography::PoiIndex index(std::move(pois));

  auto stream = rng::derive_stream(5005, 0, "occasional");
  std::map<std::int64_t, int> counts;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    ++counts[schedule::choose_occasional(proj, {25.0, 121.5}, "restaurant", index,
                                         schedule::HuffParams{}, stream)];
  }
  const double expected[3] = {0.1, 0.2, 0.7};
  for (int i = 0; i < 3; ++i) {
    const double freq = counts[i] / static_cast<double>(n);
    check.note("candidate " + std::to_string(i) + " frequency " + std::to_string(freq));
    check.require(std::fabs(freq - expected[i]) <= 0.01,
                  "frequency outside +-0.01 for candidate " + std::to_string(i));
  }

  // distance-unit invariance: x1000 on every distance-like quantity
  const std::vector<double> att{0.3, 0.8, 0.1, 0.55};
  const std::vector<double> dist{120, 800, 2300, 4900};
  schedule::HuffParams params;
  const auto baseline = schedule::selection_probabilities(att, dist, params);
  std::vector<double> scaled(dist);
  for (double& d : scaled) d *= 1000.0;
  schedule::HuffParams scaled_params;
  scaled_params.min_distance_m = params.min_distance_m * 1000.0;
  scaled_params.candidate_radius_m = params.candidate_radius_m * 1000.0;
  const auto rescaled = schedule::selection_probabilities(att, scaled, scaled_params);
  for (std::size_t i = 0; i < baseline.size(); ++i) {
    check.require(std::fabs(baseline[i] - rescaled[i]) <= 1e-12,
                  "selection probability moved under distance rescaling");
  }
}

void criterion_6_grid(Check& check) {
  const geo::BBox bbox{24.96, 121.45, 25.21, 121.67};  // Taipei-like extent
  const auto grid = geography::build_grid(bbox, 250);   // default cell size
  const auto proj = grid.spec.projection();

  for (const auto& cell : grid.cells) {
    if (cell.col + 1 < grid.spec.cols) {
      const auto& east = grid.cells[static_cast<std::size_t>(cell.cell_id + 1)];
      const double d = proj.distance_m(cell.centroid, east.centroid);
      check.require(std::fabs(d - 250.0) <= 0.001 * 250.0, "east edge outside 0.1%");
    }
    if (cell.row + 1 < grid.spec.rows) {
      const auto& north =
          grid.cells[static_cast<std::size_t>(cell.cell_id + grid.spec.cols)];
      const double d = proj.distance_m(cell.centroid, north.centroid);
      check.require(std::fabs(d - 250.0) <= 0.001 * 250.0, "north edge outside 0.1%");
    }
    check.require(grid.cell_at(cell.centroid) == cell.cell_id,
                  "centroid round-trip failed for cell " + std::to_string(cell.cell_id));
  }
  check.note(std::to_string(grid.cells.size()) + " cells checked");
}

struct DeskFixture {
  fs::path dir;
  io::RunConfig config;

  DeskFixture() {
    dir = fs::temp_directory_path() / "usim_acceptance_fixture";
    fs::remove_all(dir);
    const auto config_path = fixtures::write_fixture(dir.string(), fixtures::FixtureSpec{});
    config = io::RunConfig::from_file(config_path);
  }
};

void criterion_7_desk_scale(Check& check, DeskFixture& fixture) {
  auto config = fixture.config;
  config.paths.out_dir = (fixture.dir / "out_single").string();

  const auto start = std::chrono::steady_clock::now();
  const int rc = run_pipeline(config, fixture.dir / "config_single.json", 1, 1000);
  const double elapsed = seconds_since(start);
  check.note("1000 agents single-threaded in " + std::to_string(elapsed) + " s");
  check.require(rc == 0, "pipeline exited nonzero");
  check.require(elapsed < 60.0, "desk-scale run exceeded 60 s");

  const fs::path out(config.paths.out_dir);
  std::ifstream ind_in(out / "indicators.json");
  const auto indicators = nlohmann::json::parse(ind_in, nullptr, false);
  check.require(!indicators.is_discarded(), "indicators.json is not valid JSON");
  if (!indicators.is_discarded()) {
    const double share_sum = indicators["mode_shares"]["walk"].get<double>() +
                             indicators["mode_shares"]["transit"].get<double>() +
                             indicators["mode_shares"]["drive"].get<double>();
    check.require(std::fabs(share_sum - 1.0) <= 1e-9, "mode shares do not sum to 1");
    check.note("mode shares sum " + std::to_string(share_sum));
  }

  // heat-map conservation: feature counts recount the trips' segments
  const auto trips = io::read_trips_csv((out / "trips.csv").string());
  long long segment_count = 0;
  for (const auto& trip : trips)
    if (!trip.failed) segment_count += static_cast<long long>(trip.segments.size());
  const auto bins = io::accumulate_heatmap(trips, config.sim.bin_width_s);
  long long bin_total = 0;
  for (const auto& bin : bins) bin_total += bin.count;
  check.require(bin_total == segment_count, "heat-map conservation violated");

  std::ifstream geo_in(out / "heatmap.geojson");
  const auto geojson = nlohmann::json::parse(geo_in, nullptr, false);
  check.require(!geojson.is_discarded(), "heatmap.geojson is not valid JSON");
  if (!geojson.is_discarded()) {
    const auto errors = oracle::geojson_errors(geojson);
    for (const auto& e : errors) check.note("geojson: " + e);
    check.require(errors.empty(), "heatmap.geojson failed structural validation");
  }

  // population.jsonl parses line by line
  const auto profiles =
      population::read_profiles_jsonl((out / "population.jsonl").string());
  check.require(profiles.size() == 1000, "population.jsonl row count mismatch");
}

void criterion_8_determinism(Check& check, DeskFixture& fixture) {
  const char* files[] = {"trips.csv", "heatmap.geojson", "indicators.json",
                         "population.jsonl", "schedules.jsonl"};

  auto config = fixture.config;
  config.paths.out_dir = (fixture.dir / "out_repeat").string();
  check.require(run_pipeline(config, fixture.dir / "config_repeat.json", 1, 1000) == 0,
                "repeat run failed");
  for (const char* name : files) {
    check.require(read_bytes(fixture.dir / "out_single" / name) ==
                      read_bytes(fixture.dir / "out_repeat" / name),
                  std::string("rerun bytes differ: ") + name);
  }

  config.paths.out_dir = (fixture.dir / "out_parallel").string();
  check.require(run_pipeline(config, fixture.dir / "config_parallel.json", 8, 1000) == 0,
                "8-worker run failed");
  for (const char* name : files) {
    check.require(read_bytes(fixture.dir / "out_single" / name) ==
                      read_bytes(fixture.dir / "out_parallel" / name),
                  std::string("1-vs-8-worker bytes differ: ") + name);
  }
}

void criterion_9_scale_smoke(Check& check, DeskFixture& fixture) {
  auto config = fixture.config;
  config.paths.out_dir = (fixture.dir / "out_scale").string();

  const auto start = std::chrono::steady_clock::now();
  const int rc = run_pipeline(config, fixture.dir / "config_scale.json", 8, 100000);
  const double elapsed = seconds_since(start);
  check.require(rc == 0, "100k-agent pipeline exited nonzero");
  check.require(elapsed < 1800.0, "100k-agent run exceeded 30 minutes");

  struct rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  const double peak_gb = static_cast<double>(usage.ru_maxrss) / (1024.0 * 1024.0);
  check.note("100k agents in " + std::to_string(elapsed) + " s, peak rss " +
             std::to_string(peak_gb) + " GB (this process)");
  check.require(peak_gb < 8.0, "peak memory exceeded 8 GB");

  const auto trips =
      io::read_trips_csv((fs::path(config.paths.out_dir) / "trips.csv").string());
  check.require(!trips.empty(), "100k-agent run produced no trips");
  check.note(std::to_string(trips.size()) + " trips recorded");
}

}  // namespace

int main() {
  DeskFixture fixture;

  std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"C1 IPF property (200 random 3-d tables, tol 1e-6)", criterion_1_ipf_property},
      {"C2 IPF 2x2 oracle match (1e-6 per cell)", criterion_2_ipf_oracle},
      {"C3 McRAPTOR equals exhaustive enumeration (200 networks)",
       criterion_3_mcraptor_oracle},
      {"C4 range-query consistency (single-event + oracle windows)",
       criterion_4_range_consistency},
      {"C5 Huff 1:2:7 convergence and distance-unit invariance", criterion_5_huff},
      {"C6 grid geometry at 250 m cells", criterion_6_grid},
      {"C7 desk-scale end-to-end (1000 agents, stub LLM)",
       [&](Check& c) { criterion_7_desk_scale(c, fixture); }},
      {"C8 determinism and 1-vs-8-worker equivalence",
       [&](Check& c) { criterion_8_determinism(c, fixture); }},
      {"C9 scale smoke (100,000 agents)",
       [&](Check& c) { criterion_9_scale_smoke(c, fixture); }},
  };

  int failed = 0;
  for (auto& [name, body] : criteria) {
    Check check;
    try {
      body(check);
    } catch (const std::exception& e) {
      check.require(false, std::string("exception: ") + e.what());
    }
    const bool ok = check.failures == 0;
    std::cout << (ok ? "PASS  " : "FAIL  ") << name << "\n";
    for (const auto& note : check.notes) std::cout << "      - " << note << "\n";
    if (!ok) ++failed;
  }
  if (failed > 0) {
    std::cout << failed << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all acceptance criteria passed\n";
  return 0;
}
