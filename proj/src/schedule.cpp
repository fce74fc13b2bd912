#include "usim/schedule.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "usim/error.hpp"
#include "usim/kernels.hpp"
#include "usim/text_similarity.hpp"

namespace usim::schedule {

using nlohmann::json;

std::string_view to_string(LocationKind kind) {
  switch (kind) {
    case LocationKind::home: return "home";
    case LocationKind::routine: return "routine";
    case LocationKind::occasional: return "occasional";
  }
  return "home";
}

LocationKind location_kind_from(std::string_view s) {
  if (s == "home") return LocationKind::home;
  if (s == "routine") return LocationKind::routine;
  if (s == "occasional") return LocationKind::occasional;
  throw_error(errc::invalid_argument, "unknown location kind: " + std::string(s));
}

std::optional<std::string> DailySchedule::violation() const {
  if (activities.empty()) return "schedule has no activities";
  for (std::size_t i = 0; i < activities.size(); ++i) {
    const Activity& a = activities[i];
    if (!(a.start_s >= 0 && a.start_s < a.end_s && a.end_s <= 86400))
      return "activity '" + a.label + "' violates 0 <= start < end <= 86400";
    if (i > 0 && activities[i - 1].end_s > a.start_s)
      return "activity '" + a.label + "' overlaps its predecessor";
  }
  if (activities.front().kind != LocationKind::home) return "first activity must be at home";
  if (activities.back().kind != LocationKind::home) return "last activity must be at home";
  return std::nullopt;
}

void HuffParams::validate() const {
  if (!(min_distance_m > 0))
    throw_error(errc::invalid_argument, "huff min_distance_m must be > 0");
  if (decay < 0) throw_error(errc::invalid_argument, "huff decay must be >= 0");
  if (!(candidate_radius_m > 0) || fallback_k <= 0)
    throw_error(errc::invalid_argument, "huff candidate_radius_m and fallback_k must be > 0");
}

// ---------------------------------------------------------------------------

namespace {

DailySchedule schedule_from_json(std::int64_t agent_id, const json& value) {
  DailySchedule schedule;
  schedule.agent_id = agent_id;
  for (const auto& a : value.at("activities")) {
    Activity act;
    act.label = a.at("label").get<std::string>();
    act.kind = location_kind_from(a.at("kind").get<std::string>());
    act.start_s = a.at("start_s").get<int>();
    act.end_s = a.at("end_s").get<int>();
    if (a.contains("poi_category") && a["poi_category"].is_string())
      act.poi_category = a["poi_category"].get<std::string>();
    schedule.activities.push_back(std::move(act));
  }
  return schedule;
}

}  // namespace

DailySchedule generate_schedule(const population::AgentProfile& profile,
                                const providers::ProviderConfig& provider) {
  providers::PromptRequest request;
  request.task_kind = providers::TaskKind::daily_schedule;
  request.system_text =
      "You write one plausible weekday activity schedule for the person described by the "
      "user, leaving realistic travel gaps between activities.";
  request.user_text = json{{"agent_id", profile.agent_id},
                           {"occupation", profile.occupation},
                           {"age_band", profile.age_band},
                           {"education", profile.education},
                           {"income_band", profile.income_band}}
                          .dump();
  request.response_schema_id = std::string(providers::kDailyScheduleSchema);

  auto response = providers::complete_structured(request, provider);
  DailySchedule schedule = schedule_from_json(profile.agent_id, response.value);
  auto violation = schedule.violation();
  if (violation && provider.mode == providers::Mode::live) {
    // one repair attempt, then reject
    providers::PromptRequest retry = request;
    retry.user_text += "\n\nThe previous schedule was invalid: " + *violation +
                       "\nReturn a corrected schedule.";
    response = providers::complete_structured(retry, provider);
    schedule = schedule_from_json(profile.agent_id, response.value);
    violation = schedule.violation();
  }
  if (violation)
    throw_error(errc::invalid_schedule,
                "agent " + std::to_string(profile.agent_id) + ": " + *violation);
  return schedule;
}

std::string map_activity_category(const std::string& label, const CategoryCatalog& categories,
                                  const providers::ProviderConfig& provider) {
  (void)provider;  // hook for embedding-backed similarity; trigram cosine needs no call
  if (categories.empty())
    throw_error(errc::empty_catalog, "map_activity_category: empty category catalog");

  const std::string* best = nullptr;
  double best_sim = -1;
  for (const auto& [category, description] : categories) {
    const double sim = text::trigram_cosine(label, description);
    if (sim > best_sim || (sim == best_sim && best != nullptr && category < *best)) {
      best_sim = sim;
      best = &category;
    }
  }
  return *best;
}

void resolve_activity_categories(DailySchedule& schedule, const CategoryCatalog& categories,
                                 const providers::ProviderConfig& provider) {
  for (auto& act : schedule.activities) {
    if (act.kind == LocationKind::occasional && !act.poi_category)
      act.poi_category = map_activity_category(act.label, categories, provider);
  }
}

// ---------------------------------------------------------------------------

CandidateWeight huff_weight(const geo::Projection& proj, geo::LatLon origin,
                            const geography::Poi& poi, const HuffParams& params) {
  params.validate();
  CandidateWeight cw;
  cw.poi_id = poi.poi_id;
  cw.attractiveness = poi.popularity * poi.credibility;
  const double raw = proj.distance_m(origin, poi.pos);
  cw.distance_m = raw < params.min_distance_m ? params.min_distance_m : raw;
  double w[1];
  const double att[1] = {cw.attractiveness};
  const double dist[1] = {raw};
  kernels::active_ops().huff_weights(att, dist, 1, params.decay, params.min_distance_m, w);
  cw.weight = w[0];
  return cw;
}

std::vector<double> selection_probabilities(std::span<const double> attractiveness,
                                            std::span<const double> distances,
                                            const HuffParams& params) {
  std::vector<double> probs(attractiveness.size(), 0.0);
  if (probs.empty()) return probs;
  kernels::active_ops().huff_weights(attractiveness.data(), distances.data(),
                                     attractiveness.size(), params.decay, params.min_distance_m,
                                     probs.data());
  double sum = 0;
  for (double w : probs) sum += w;
  if (sum > 0) {
    for (double& w : probs) w /= sum;
  } else {
    std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(probs.size()));
  }
  return probs;
}

std::int64_t choose_occasional(const geo::Projection& proj, geo::LatLon origin,
                               const std::string& category, const geography::PoiIndex& pois,
                               const HuffParams& params, rng::Stream& stream) {
  params.validate();
  const geography::PoiIndex::Bucket* bucket = pois.category_bucket(category);
  if (bucket == nullptr || bucket->poi_pos.empty())
    throw_error(errc::no_candidates, "no POI in category '" + category + "'");

  const std::size_t n = bucket->poi_pos.size();
  std::vector<double> dist(n);
  proj.distance_batch(origin, bucket->lats, bucket->lons, dist);

  // radius filter; k nearest of the category as fallback
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i)
    if (dist[i] <= params.candidate_radius_m) candidates.push_back(i);
  if (candidates.empty()) {
    candidates.resize(n);
    for (std::size_t i = 0; i < n; ++i) candidates[i] = i;
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      if (dist[a] != dist[b]) return dist[a] < dist[b];
      return pois.pois()[bucket->poi_pos[a]].poi_id < pois.pois()[bucket->poi_pos[b]].poi_id;
    });
    if (candidates.size() > static_cast<std::size_t>(params.fallback_k))
      candidates.resize(static_cast<std::size_t>(params.fallback_k));
  }

  std::vector<double> att(candidates.size()), d(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    att[i] = bucket->attractiveness[candidates[i]];
    d[i] = dist[candidates[i]];
  }
  const auto probs = selection_probabilities(att, d, params);

  const double u = stream.next_double();
  double acc = 0;
  std::size_t pick = candidates.size() - 1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) {
      pick = i;
      break;
    }
  }
  return pois.pois()[bucket->poi_pos[candidates[pick]]].poi_id;
}

}  // namespace usim::schedule
