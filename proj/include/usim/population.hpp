#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "usim/providers.hpp"

namespace usim::population {

struct MarginalTable {
  std::string attribute_id;
  std::vector<std::string> labels;
  std::vector<double> counts;
  double total = 0;

  void validate() const;  // counts/labels aligned, sum == total within 1e-9 rel
};

// Dense non-negative tensor over demographic categories, row-major in the
// declared dim order.
struct JointTable {
  std::vector<std::string> dims;
  std::vector<std::vector<std::string>> labels;  // one label list per dim
  std::vector<std::size_t> shape;
  std::vector<double> cells;
  double total = 0;

  std::size_t cell_count() const { return cells.size(); }
  std::size_t stride(std::size_t dim) const;           // row-major stride of `dim`
  std::vector<double> project(std::size_t dim) const;  // per-category sums
  double mass() const;

  void validate() const;

  static JointTable from_json(const nlohmann::json& value);
  nlohmann::json to_json() const;
};

struct SalaryBands {
  struct Band {
    std::string income_band;
    double min_monthly = 0;
    double max_monthly = 0;
  };
  std::vector<Band> bands;

  void validate() const;  // non-overlapping, ordered, min < max
  const Band& lookup(const std::string& income_band) const;
};

struct ModePrefs {
  double walk = 0, transit = 0, drive = 0;
};

struct AgentProfile {
  std::int64_t agent_id = 0;
  std::string age_band, education, occupation, income_band;
  double monthly_income = 0;
  ModePrefs mode_prefs;
  std::optional<std::int64_t> home_cell_id;
  std::optional<std::int64_t> routine_poi_id;
};

// Asks the provider for a joint table seeded from the marginals (stub: product
// of marginals with a deterministic perturbation), then normalizes the mass to
// the shared total. Marginal totals may disagree by at most 0.5% relative; the
// first marginal's total is canonical.
JointTable seed_joint_from_llm(const std::vector<MarginalTable>& marginals,
                               const providers::ProviderConfig& provider);

// Classic IPF: scale one dim after another in declared order until every
// marginal projection matches within `tol` relative per category. Zero seed
// cells stay exactly zero.
JointTable ipf_fit(JointTable seed, const std::vector<MarginalTable>& marginals,
                   double tol = 1e-6, int max_iter = 1000);

// Draw n profiles i.i.d. from the joint (probability cell/total). Incomes are
// uniform within the salary band, mode preferences come from per-occupation-
// class priors plus deterministic jitter. Pure function of master_seed.
std::vector<AgentProfile> sample_profiles(const JointTable& joint, std::int64_t n,
                                          const SalaryBands& bands, std::uint64_t master_seed);

ModePrefs mode_prefs_for(const std::string& occupation, std::uint64_t master_seed,
                         std::int64_t agent_id);

nlohmann::ordered_json profile_to_json(const AgentProfile& profile);
AgentProfile profile_from_json(const nlohmann::json& j);

void write_profiles_jsonl(const std::vector<AgentProfile>& profiles, const std::string& path);
std::vector<AgentProfile> read_profiles_jsonl(const std::string& path);

}  // namespace usim::population
