#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "support/oracles.hpp"
#include "usim/error.hpp"
#include "usim/schedule.hpp"

using namespace usim;
using namespace usim::schedule;

namespace {

providers::ProviderConfig stub_provider() {
  providers::ProviderConfig cfg;
  cfg.stub_seed = 42;
  return cfg;
}

population::AgentProfile office_profile() {
  population::AgentProfile p;
  p.agent_id = 3;
  p.occupation = "software engineer";
  p.age_band = "30-44";
  p.education = "bachelor";
  p.income_band = "mid";
  p.home_cell_id = 0;
  p.routine_poi_id = 0;
  return p;
}

geography::PoiIndex poi_line(int count, const std::string& category, double step_lat,
                             double pop = 1.0, double cred = 1.0) {
  std::vector<geography::Poi> pois;
  for (int i = 0; i < count; ++i) {
    geography::Poi p;
    p.poi_id = i;
    p.name = category + std::to_string(i);
    p.category = category;
    p.pos = {25.0 + step_lat * (i + 1), 121.5};
    p.popularity = pop;
    p.credibility = cred;
    pois.push_back(p);
  }
  return geography::PoiIndex(std::move(pois));
}

}  // namespace

TEST_CASE("stub schedules are deterministic and valid") {
  const auto a = generate_schedule(office_profile(), stub_provider());
  const auto b = generate_schedule(office_profile(), stub_provider());
  REQUIRE(a.activities.size() == b.activities.size());
  for (std::size_t i = 0; i < a.activities.size(); ++i) {
    CHECK(a.activities[i].label == b.activities[i].label);
    CHECK(a.activities[i].start_s == b.activities[i].start_s);
    CHECK(a.activities[i].end_s == b.activities[i].end_s);
  }
  CHECK(!a.violation());
}

TEST_CASE("office-worker template: 4 activities, exactly one occasional") {
  const auto sched = generate_schedule(office_profile(), stub_provider());
  REQUIRE(sched.activities.size() == 4);
  int occasional = 0;
  for (const auto& act : sched.activities)
    if (act.kind == LocationKind::occasional) ++occasional;
  CHECK(occasional == 1);
  CHECK(sched.activities.front().kind == LocationKind::home);
  CHECK(sched.activities.back().kind == LocationKind::home);
}

TEST_CASE("schedule invariant violations are reported") {
  DailySchedule sched;
  sched.activities = {{"home", LocationKind::home, {}, 0, 30000},
                      {"work", LocationKind::routine, {}, 20000, 40000}};  // overlap
  CHECK(sched.violation().has_value());

  sched.activities = {{"work", LocationKind::routine, {}, 0, 30000}};  // no home bracket
  CHECK(sched.violation().has_value());

  sched.activities = {{"home", LocationKind::home, {}, 0, 90000}};  // past midnight
  CHECK(sched.violation().has_value());
}

// ---------------------------------------------------------------------------
// activity -> category mapping
// ---------------------------------------------------------------------------

TEST_CASE("an activity label equal to a category description maps to it") {
  const CategoryCatalog catalog{{"exact", "dinner with friends"}, {"other", "fitness"}};
  CHECK(map_activity_category("dinner with friends", catalog, stub_provider()) == "exact");
}

TEST_CASE("an empty category list raises EmptyCatalog") {
  CHECK_THROWS_AS(map_activity_category("dinner", {}, stub_provider()), error);
}

TEST_CASE("dinner with friends lands on restaurant, not gym") {
  const CategoryCatalog catalog{{"restaurant", "dining, meals, food, dinner"},
                                {"gym", "fitness, exercise"}};
  CHECK(map_activity_category("dinner with friends", catalog, stub_provider()) == "restaurant");
  CHECK(oracle::naive_trigram_cosine("dinner with friends", catalog[0].second) >
        oracle::naive_trigram_cosine("dinner with friends", catalog[1].second));
}

TEST_CASE("resolve_activity_categories fills every occasional activity") {
  auto sched = generate_schedule(office_profile(), stub_provider());
  const CategoryCatalog catalog{{"restaurant", "dining, meals, dinner, food"},
                                {"park", "green space, walking"}};
  resolve_activity_categories(sched, catalog, stub_provider());
  for (const auto& act : sched.activities) {
    if (act.kind == LocationKind::occasional) {
      REQUIRE(act.poi_category.has_value());
      CHECK(*act.poi_category == "restaurant");
    }
  }
}

// ---------------------------------------------------------------------------
// Huff weights
// ---------------------------------------------------------------------------

TEST_CASE("huff weight evaluates attractiveness / distance^decay") {
  const geo::Projection proj(25.0);
  geography::Poi poi;
  poi.poi_id = 1;
  poi.popularity = 0.5;
  poi.credibility = 0.8;
  // place the poi exactly 2000 m north
  poi.pos = proj.offset({25.0, 121.5}, 0, 2000);
  const auto cw = huff_weight(proj, {25.0, 121.5}, poi, HuffParams{});
  CHECK(cw.attractiveness == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(cw.distance_m == doctest::Approx(2000).epsilon(1e-9));
  CHECK(cw.weight == doctest::Approx(1.0e-7).epsilon(1e-9));
}

TEST_CASE("decay 0 makes the weight equal the attractiveness") {
  const geo::Projection proj(25.0);
  geography::Poi poi;
  poi.popularity = 0.6;
  poi.credibility = 0.5;
  poi.pos = proj.offset({25.0, 121.5}, 0, 4321);
  HuffParams params;
  params.decay = 0;
  const auto cw = huff_weight(proj, {25.0, 121.5}, poi, params);
  CHECK(cw.weight == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("a coincident POI is clamped to min_distance") {
  const geo::Projection proj(25.0);
  geography::Poi poi;
  poi.popularity = 1;
  poi.credibility = 1;
  poi.pos = {25.0, 121.5};
  const auto cw = huff_weight(proj, {25.0, 121.5}, poi, HuffParams{});
  CHECK(cw.distance_m == 50.0);
  CHECK(cw.weight == doctest::Approx(4.0e-4).epsilon(1e-12));
}

TEST_CASE("nearer candidates of equal attractiveness weigh strictly more") {
  const geo::Projection proj(25.0);
  HuffParams params;
  geography::Poi near, far;
  near.popularity = far.popularity = 0.7;
  near.credibility = far.credibility = 0.9;
  near.pos = proj.offset({25.0, 121.5}, 0, 300);
  far.pos = proj.offset({25.0, 121.5}, 0, 900);
  CHECK(huff_weight(proj, {25.0, 121.5}, near, params).weight >
        huff_weight(proj, {25.0, 121.5}, far, params).weight);
}

// ---------------------------------------------------------------------------
// choose_occasional
// ---------------------------------------------------------------------------

TEST_CASE("a single candidate is always chosen") {
  const auto pois = poi_line(1, "cafe", 0.001);
  const geo::Projection proj(25.0);
  auto stream = rng::derive_stream(1, 1, "occasional");
  for (int i = 0; i < 20; ++i)
    CHECK(choose_occasional(proj, {25.0, 121.5}, "cafe", pois, HuffParams{}, stream) == 0);
}

TEST_CASE("an absent category raises NoCandidates") {
  const auto pois = poi_line(3, "cafe", 0.001);
  const geo::Projection proj(25.0);
  auto stream = rng::derive_stream(1, 1, "occasional");
  CHECK_THROWS_AS(choose_occasional(proj, {25.0, 121.5}, "opera", pois, HuffParams{}, stream),
                  error);
}

TEST_CASE("selection probabilities sum to one") {
  const std::vector<double> att{0.2, 0.9, 0.5, 0.01};
  const std::vector<double> dist{100, 900, 2500, 4000};
  const auto probs = selection_probabilities(att, dist, HuffParams{});
  double sum = 0;
  for (double p : probs) sum += p;
  CHECK(std::fabs(sum - 1.0) <= 1e-9);
}

TEST_CASE("weights proportional to 1:2:7 give 0.1/0.2/0.7 over 10^6 draws") {
  // equal distances, attractiveness 0.1/0.2/0.7 => weights proportional 1:2:7
  const geo::Projection proj(25.0);
  std::vector<geography::Poi> pois;
  const double atts[3] = {0.1, 0.2, 0.7};
  for (int i = 0; i < 3; ++i) {
    geography::Poi p;
    p.poi_id = i;
    p.category = "restaurant";
    p.popularity = atts[i];
    p.credibility = 1.0;
    pois.push_back(p);
  }
  // all three at the same distance so only attractiveness differs
  pois[0].pos = proj.offset({25.0, 121.5}, 1000, 0);
  pois[1].pos = proj.offset({25.0, 121.5}, -1000, 0);
  pois[2].pos = proj.offset({25.0, 121.5}, 0, 1000);
  const geography::PoiIndex index(std::move(pois));

  auto stream = rng::derive_stream(123, 0, "occasional");
  std::map<std::int64_t, int> counts;
  const int n = 1000000;
  for (int i = 0; i < n; ++i)
    ++counts[choose_occasional(proj, {25.0, 121.5}, "restaurant", index, HuffParams{}, stream)];

  CHECK(std::fabs(counts[0] / double(n) - 0.1) < 0.01);
  CHECK(std::fabs(counts[1] / double(n) - 0.2) < 0.01);
  CHECK(std::fabs(counts[2] / double(n) - 0.7) < 0.01);
}

TEST_CASE("rescaling every distance by 1000 leaves selection probabilities unchanged") {
  const std::vector<double> att{0.3, 0.8, 0.1, 0.55};
  const std::vector<double> dist{120, 800, 2300, 4900};
  HuffParams params;
  const auto baseline = selection_probabilities(att, dist, params);

  std::vector<double> scaled(dist);
  for (double& d : scaled) d *= 1000.0;
  HuffParams scaled_params;
  scaled_params.min_distance_m = params.min_distance_m * 1000.0;
  scaled_params.candidate_radius_m = params.candidate_radius_m * 1000.0;
  const auto rescaled = selection_probabilities(att, scaled, scaled_params);

  REQUIRE(baseline.size() == rescaled.size());
  for (std::size_t i = 0; i < baseline.size(); ++i)
    CHECK(std::fabs(baseline[i] - rescaled[i]) <= 1e-12);
}

TEST_CASE("the radius filter falls back to the k nearest candidates") {
  // all POIs beyond the radius: fallback_k nearest must be used
  const auto pois = poi_line(6, "park", 0.1);  // ~11 km spacing
  const geo::Projection proj(25.0);
  HuffParams params;
  params.candidate_radius_m = 1000;
  params.fallback_k = 2;
  auto stream = rng::derive_stream(3, 1, "occasional");
  std::map<std::int64_t, int> counts;
  for (int i = 0; i < 2000; ++i)
    ++counts[choose_occasional(proj, {25.0, 121.5}, "park", pois, params, stream)];
  CHECK(counts.size() == 2);  // only the two nearest ever win
  CHECK(counts.begin()->first == 0);
}
