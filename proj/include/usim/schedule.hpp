#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "usim/geo.hpp"
#include "usim/geography.hpp"
#include "usim/population.hpp"
#include "usim/providers.hpp"
#include "usim/rng.hpp"

namespace usim::schedule {

enum class LocationKind { home, routine, occasional };
std::string_view to_string(LocationKind kind);
LocationKind location_kind_from(std::string_view s);

struct Activity {
  std::string label;
  LocationKind kind = LocationKind::home;
  std::optional<std::string> poi_category;  // required once resolved, occasional only
  int start_s = 0;
  int end_s = 0;
};

struct DailySchedule {
  std::int64_t agent_id = 0;
  std::vector<Activity> activities;

  // nullopt when valid: chronological, non-overlapping, inside one day,
  // first and last activity at home
  std::optional<std::string> violation() const;
};

struct HuffParams {
  double decay = 2.0;
  double min_distance_m = 50;
  double candidate_radius_m = 5000;
  int fallback_k = 10;

  void validate() const;
};

struct CandidateWeight {
  std::int64_t poi_id = 0;
  double distance_m = 0;  // clamped to min_distance_m
  double attractiveness = 0;
  double weight = 0;
};

// Provider-backed schedule generation; live responses violating the schedule
// invariants are retried once, then rejected.
DailySchedule generate_schedule(const population::AgentProfile& profile,
                                const providers::ProviderConfig& provider);

using CategoryCatalog = std::vector<std::pair<std::string, std::string>>;

// Trigram-cosine argmax of the activity label against the category
// descriptions (same similarity and provider hook as geography's industry
// matching); ties break lexicographically.
std::string map_activity_category(const std::string& label, const CategoryCatalog& categories,
                                  const providers::ProviderConfig& provider);

// fills poi_category for every occasional activity
void resolve_activity_categories(DailySchedule& schedule, const CategoryCatalog& categories,
                                 const providers::ProviderConfig& provider);

CandidateWeight huff_weight(const geo::Projection& proj, geo::LatLon origin,
                            const geography::Poi& poi, const HuffParams& params);

// normalized selection probabilities over a candidate set; uniform fallback
// when every attractiveness is zero
std::vector<double> selection_probabilities(std::span<const double> attractiveness,
                                            std::span<const double> distances,
                                            const HuffParams& params);

// Candidates are the category's POIs within candidate_radius_m of the origin,
// or the fallback_k nearest of that category when the radius is empty;
// selection probability is weight / sum of weights.
std::int64_t choose_occasional(const geo::Projection& proj, geo::LatLon origin,
                               const std::string& category, const geography::PoiIndex& pois,
                               const HuffParams& params, rng::Stream& stream);

}  // namespace usim::schedule
