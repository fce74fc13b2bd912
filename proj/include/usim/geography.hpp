#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "usim/geo.hpp"
#include "usim/population.hpp"
#include "usim/providers.hpp"
#include "usim/rng.hpp"

namespace usim::geography {

struct GridSpec {
  geo::LatLon origin;        // SW corner
  double cell_size_m = 250;  // paper-default cell edge
  int rows = 0, cols = 0;
  double ref_lat_deg = 0;  // equirectangular reference latitude

  geo::Projection projection() const { return geo::Projection(ref_lat_deg); }
};

struct GridCell {
  std::int64_t cell_id = 0;  // row * cols + col
  int row = 0, col = 0;
  geo::LatLon centroid;
  std::int64_t capacity = 0;  // persons
  double avg_income = 0;      // currency / month
};

struct Grid {
  GridSpec spec;
  std::vector<GridCell> cells;  // ordered by cell_id

  std::int64_t cell_at(geo::LatLon p) const;  // total over the bbox (clamped)
  const GridCell& cell(std::int64_t cell_id) const;
};

// rows/cols = ceil(projected extent / cell_size); capacities and incomes are
// zero until merged from the cells dataset
Grid build_grid(const geo::BBox& bbox, double cell_size_m = 250);

struct Poi {
  std::int64_t poi_id = 0;
  std::string name;
  std::string category;
  std::string industry;  // empty = not a routine workplace
  geo::LatLon pos;
  double popularity = 0;   // in [0,1]
  double credibility = 0;  // in [0,1]
};

// Immutable lookup structure; category/industry buckets keep SoA coordinate
// arrays for the batched distance/weight kernels.
class PoiIndex {
public:
  struct Bucket {
    std::vector<std::size_t> poi_pos;  // indices into pois()
    std::vector<double> lats, lons, attractiveness;
  };

  explicit PoiIndex(std::vector<Poi> pois);

  const std::vector<Poi>& pois() const { return pois_; }
  const Poi& by_id(std::int64_t poi_id) const;
  const Bucket* category_bucket(const std::string& category) const;
  const Bucket* industry_bucket(const std::string& industry) const;

private:
  std::vector<Poi> pois_;
  std::unordered_map<std::int64_t, std::size_t> id_index_;
  std::unordered_map<std::string, Bucket> by_category_;
  std::unordered_map<std::string, Bucket> by_industry_;
};

struct IndustryCatalog {
  std::vector<std::pair<std::string, std::string>> entries;  // label -> description

  void validate() const;  // unique labels, non-empty descriptions
};

// Greedy income matching: agents in descending monthly income (ties by
// agent_id) each take the open cell minimizing |income - avg_income| (ties by
// cell_id). Returns home cell ids aligned with `profiles`.
std::vector<std::int64_t> allocate_homes(const std::vector<population::AgentProfile>& profiles,
                                         const std::vector<GridCell>& cells);

// Provider-described occupation matched to the catalog by trigram cosine;
// ties break to the lexicographically smallest industry label.
std::string match_industry(const std::string& occupation, const IndustryCatalog& catalog,
                           const providers::ProviderConfig& provider);

// uniform draw over the POIs of the matched industry
std::int64_t assign_routine(const population::AgentProfile& agent, const std::string& industry,
                            const PoiIndex& pois, rng::Stream& stream);

}  // namespace usim::geography
