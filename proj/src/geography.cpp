#include "usim/geography.hpp"

#include <algorithm>
#include <cmath>

#include "usim/error.hpp"
#include "usim/kernels.hpp"
#include "usim/text_similarity.hpp"

namespace usim::geography {

std::int64_t Grid::cell_at(geo::LatLon p) const {
  const auto proj = spec.projection();
  const double x = proj.x(p.lon, spec.origin.lon);
  const double y = proj.y(p.lat, spec.origin.lat);
  auto clamp = [](int v, int hi) { return v < 0 ? 0 : (v >= hi ? hi - 1 : v); };
  const int col = clamp(static_cast<int>(std::floor(x / spec.cell_size_m)), spec.cols);
  const int row = clamp(static_cast<int>(std::floor(y / spec.cell_size_m)), spec.rows);
  return static_cast<std::int64_t>(row) * spec.cols + col;
}

const GridCell& Grid::cell(std::int64_t cell_id) const {
  if (cell_id < 0 || cell_id >= static_cast<std::int64_t>(cells.size()))
    throw_error(errc::invalid_argument, "cell_id out of range: " + std::to_string(cell_id));
  return cells[static_cast<std::size_t>(cell_id)];
}

Grid build_grid(const geo::BBox& bbox, double cell_size_m) {
  if (bbox.degenerate() || !(cell_size_m > 0))
    throw_error(errc::degenerate_bbox, "build_grid: degenerate bbox or non-positive cell size");

  GridSpec spec;
  spec.origin = {bbox.min_lat, bbox.min_lon};
  spec.cell_size_m = cell_size_m;
  spec.ref_lat_deg = bbox.mid_lat();

  const auto proj = spec.projection();
  const double width_m = proj.x(bbox.max_lon, bbox.min_lon);
  const double height_m = proj.y(bbox.max_lat, bbox.min_lat);
  spec.cols = static_cast<int>(std::ceil(width_m / cell_size_m));
  spec.rows = static_cast<int>(std::ceil(height_m / cell_size_m));

  Grid grid;
  grid.spec = spec;
  grid.cells.reserve(static_cast<std::size_t>(spec.rows) * spec.cols);
  for (int row = 0; row < spec.rows; ++row) {
    for (int col = 0; col < spec.cols; ++col) {
      GridCell cell;
      cell.cell_id = static_cast<std::int64_t>(row) * spec.cols + col;
      cell.row = row;
      cell.col = col;
      cell.centroid = proj.offset(spec.origin, (col + 0.5) * cell_size_m,
                                  (row + 0.5) * cell_size_m);
      grid.cells.push_back(cell);
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------

PoiIndex::PoiIndex(std::vector<Poi> pois) : pois_(std::move(pois)) {
  for (std::size_t i = 0; i < pois_.size(); ++i) {
    const Poi& p = pois_[i];
    if (p.popularity < 0 || p.popularity > 1 || p.credibility < 0 || p.credibility > 1)
      throw_error(errc::invalid_argument,
                  "poi " + std::to_string(p.poi_id) + ": popularity/credibility must be in [0,1]");
    if (!id_index_.emplace(p.poi_id, i).second)
      throw_error(errc::invalid_argument, "duplicate poi_id " + std::to_string(p.poi_id));

    auto push = [&](Bucket& b) {
      b.poi_pos.push_back(i);
      b.lats.push_back(p.pos.lat);
      b.lons.push_back(p.pos.lon);
      b.attractiveness.push_back(p.popularity * p.credibility);
    };
    push(by_category_[p.category]);
    if (!p.industry.empty()) push(by_industry_[p.industry]);
  }
}

const Poi& PoiIndex::by_id(std::int64_t poi_id) const {
  auto it = id_index_.find(poi_id);
  if (it == id_index_.end())
    throw_error(errc::invalid_argument, "unknown poi_id " + std::to_string(poi_id));
  return pois_[it->second];
}

const PoiIndex::Bucket* PoiIndex::category_bucket(const std::string& category) const {
  auto it = by_category_.find(category);
  return it == by_category_.end() ? nullptr : &it->second;
}

const PoiIndex::Bucket* PoiIndex::industry_bucket(const std::string& industry) const {
  auto it = by_industry_.find(industry);
  return it == by_industry_.end() ? nullptr : &it->second;
}

void IndustryCatalog::validate() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].first.empty() || entries[i].second.empty())
      throw_error(errc::invalid_argument, "industry catalog entries need label and description");
    for (std::size_t j = i + 1; j < entries.size(); ++j)
      if (entries[i].first == entries[j].first)
        throw_error(errc::invalid_argument, "duplicate industry label: " + entries[i].first);
  }
}

// ---------------------------------------------------------------------------

std::vector<std::int64_t> allocate_homes(const std::vector<population::AgentProfile>& profiles,
                                         const std::vector<GridCell>& cells) {
  std::int64_t capacity = 0;
  for (const auto& c : cells) capacity += c.capacity;
  if (capacity < static_cast<std::int64_t>(profiles.size()))
    throw_error(errc::insufficient_capacity,
                "allocate_homes: " + std::to_string(profiles.size()) + " agents but only " +
                    std::to_string(capacity) + " slots");

  // descending income, ties by agent_id
  std::vector<std::size_t> order(profiles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (profiles[a].monthly_income != profiles[b].monthly_income)
      return profiles[a].monthly_income > profiles[b].monthly_income;
    return profiles[a].agent_id < profiles[b].agent_id;
  });

  // cells scanned in cell_id order so the kernel's lowest-index tie rule is
  // exactly the lowest-cell_id rule
  std::vector<GridCell> sorted_cells(cells);
  std::sort(sorted_cells.begin(), sorted_cells.end(),
            [](const GridCell& a, const GridCell& b) { return a.cell_id < b.cell_id; });
  std::vector<double> incomes(sorted_cells.size());
  std::vector<std::int64_t> remaining(sorted_cells.size());
  std::vector<unsigned char> open(sorted_cells.size());
  for (std::size_t i = 0; i < sorted_cells.size(); ++i) {
    incomes[i] = sorted_cells[i].avg_income;
    remaining[i] = sorted_cells[i].capacity;
    open[i] = remaining[i] > 0 ? 1 : 0;
  }

  const auto& ops = kernels::active_ops();
  std::vector<std::int64_t> assignment(profiles.size(), -1);
  for (std::size_t agent : order) {
    const std::size_t slot = ops.argmin_abs_diff(incomes.data(), open.data(), incomes.size(),
                                                 profiles[agent].monthly_income);
    if (slot == kernels::npos)
      throw_error(errc::insufficient_capacity, "allocate_homes: ran out of open cells");
    assignment[agent] = sorted_cells[slot].cell_id;
    if (--remaining[slot] == 0) open[slot] = 0;
  }
  return assignment;
}

std::string match_industry(const std::string& occupation, const IndustryCatalog& catalog,
                           const providers::ProviderConfig& provider) {
  if (catalog.entries.empty())
    throw_error(errc::empty_catalog, "match_industry: empty industry catalog");
  catalog.validate();

  providers::PromptRequest request;
  request.task_kind = providers::TaskKind::occupation_description;
  request.system_text = "You describe occupations so they can be matched to industry categories.";
  request.user_text = occupation;
  request.response_schema_id = std::string(providers::kOccupationDescriptionSchema);
  const auto response = providers::complete_structured(request, provider);
  const std::string description = response.value.at("description").get<std::string>();

  const std::string* best_label = nullptr;
  double best_sim = -1;
  for (const auto& [label, industry_description] : catalog.entries) {
    const double sim = text::trigram_cosine(description, industry_description);
    if (sim > best_sim || (sim == best_sim && best_label != nullptr && label < *best_label)) {
      best_sim = sim;
      best_label = &label;
    }
  }
  return *best_label;
}

std::int64_t assign_routine(const population::AgentProfile& agent, const std::string& industry,
                            const PoiIndex& pois, rng::Stream& stream) {
  (void)agent;
  const PoiIndex::Bucket* bucket = pois.industry_bucket(industry);
  if (bucket == nullptr || bucket->poi_pos.empty())
    throw_error(errc::no_routine_poi, "no POI carries industry '" + industry + "'");
  const std::size_t pick = stream.next_below(bucket->poi_pos.size());
  return pois.pois()[bucket->poi_pos[pick]].poi_id;
}

}  // namespace usim::geography
