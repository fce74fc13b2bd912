#include "usim/population.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "usim/error.hpp"
#include "usim/kernels.hpp"
#include "usim/occupation.hpp"
#include "usim/rng.hpp"

namespace usim::population {

using nlohmann::json;
using nlohmann::ordered_json;

void MarginalTable::validate() const {
  if (labels.empty() || labels.size() != counts.size())
    throw_error(errc::invalid_argument,
                "marginal '" + attribute_id + "': labels and counts must align and be non-empty");
  double sum = 0;
  for (double c : counts) {
    if (!(c >= 0)) throw_error(errc::invalid_argument,
                               "marginal '" + attribute_id + "': counts must be >= 0");
    sum += c;
  }
  if (!(total > 0) || std::fabs(sum - total) > 1e-9 * total)
    throw_error(errc::invalid_argument,
                "marginal '" + attribute_id + "': counts must sum to the declared total");
}

std::size_t JointTable::stride(std::size_t dim) const {
  std::size_t s = 1;
  for (std::size_t d = dim + 1; d < shape.size(); ++d) s *= shape[d];
  return s;
}

std::vector<double> JointTable::project(std::size_t dim) const {
  std::vector<double> out(shape[dim], 0.0);
  const std::size_t s = stride(dim);
  const std::size_t k = shape[dim];
  for (std::size_t i = 0; i < cells.size(); ++i) out[(i / s) % k] += cells[i];
  return out;
}

double JointTable::mass() const {
  double m = 0;
  for (double c : cells) m += c;
  return m;
}

void JointTable::validate() const {
  if (dims.size() < 2 || dims.size() != shape.size() || dims.size() != labels.size())
    throw_error(errc::invalid_argument, "joint table needs >= 2 aligned dims");
  std::size_t expected = 1;
  for (std::size_t d = 0; d < shape.size(); ++d) {
    if (shape[d] == 0 || labels[d].size() != shape[d])
      throw_error(errc::invalid_argument, "joint table shape/labels mismatch");
    expected *= shape[d];
  }
  if (cells.size() != expected)
    throw_error(errc::invalid_argument, "joint table cell count mismatch");
  for (double c : cells)
    if (!(c >= 0)) throw_error(errc::invalid_argument, "joint table cells must be >= 0");
  const double m = mass();
  if (std::fabs(m - total) > 1e-9 * std::max(1.0, total))
    throw_error(errc::invalid_argument, "joint table mass must equal the declared total");
}

JointTable JointTable::from_json(const json& value) {
  JointTable t;
  t.dims = value.at("dims").get<std::vector<std::string>>();
  t.labels = value.at("labels").get<std::vector<std::vector<std::string>>>();
  t.shape = value.at("shape").get<std::vector<std::size_t>>();
  t.cells = value.at("cells").get<std::vector<double>>();
  t.total = value.at("total").get<double>();
  return t;
}

json JointTable::to_json() const {
  return json{{"dims", dims}, {"labels", labels}, {"shape", shape}, {"cells", cells},
              {"total", total}};
}

void SalaryBands::validate() const {
  if (bands.empty()) throw_error(errc::invalid_argument, "salary bands must be non-empty");
  for (std::size_t i = 0; i < bands.size(); ++i) {
    if (!(bands[i].min_monthly < bands[i].max_monthly))
      throw_error(errc::invalid_argument, "salary band '" + bands[i].income_band +
                                              "' needs min < max");
    if (i > 0 && !(bands[i - 1].max_monthly <= bands[i].min_monthly))
      throw_error(errc::invalid_argument, "salary bands must be ordered and non-overlapping");
  }
}

const SalaryBands::Band& SalaryBands::lookup(const std::string& income_band) const {
  for (const auto& b : bands)
    if (b.income_band == income_band) return b;
  throw_error(errc::invalid_argument, "unknown income band: " + income_band);
}

// ---------------------------------------------------------------------------

JointTable seed_joint_from_llm(const std::vector<MarginalTable>& marginals,
                               const providers::ProviderConfig& provider) {
  if (marginals.size() < 2)
    throw_error(errc::invalid_argument, "joint seeding needs >= 2 marginals");
  for (const auto& m : marginals) m.validate();

  const double total = marginals.front().total;
  for (const auto& m : marginals) {
    if (std::fabs(m.total - total) > 0.005 * total)
      throw_error(errc::inconsistent_totals,
                  "marginal totals disagree beyond 0.5%: '" + marginals.front().attribute_id +
                      "' has " + std::to_string(total) + ", '" + m.attribute_id + "' has " +
                      std::to_string(m.total));
  }

  json attributes = json::array();
  for (const auto& m : marginals) {
    attributes.push_back(json{{"attribute_id", m.attribute_id},
                              {"labels", m.labels},
                              {"counts", m.counts}});
  }

  providers::PromptRequest request;
  request.task_kind = providers::TaskKind::joint_seed;
  request.system_text =
      "You estimate a joint distribution over demographic attributes from the marginal "
      "distributions supplied by the user, reflecting real-world correlations.";
  request.user_text = json{{"attributes", attributes}, {"total", total}}.dump();
  request.response_schema_id = std::string(providers::kJointTableSchema);

  const auto response = providers::complete_structured(request, provider);
  JointTable joint = JointTable::from_json(response.value);
  joint.total = total;

  const double m = joint.mass();
  if (!(m > 0)) throw_error(errc::schema_violation, "provider returned an all-zero joint table");
  const double scale = total / m;
  for (double& c : joint.cells) c *= scale;

  joint.validate();
  if (joint.dims.size() != marginals.size())
    throw_error(errc::schema_violation, "provider joint table dims mismatch the marginals");
  for (std::size_t d = 0; d < marginals.size(); ++d) {
    if (joint.dims[d] != marginals[d].attribute_id ||
        joint.shape[d] != marginals[d].labels.size())
      throw_error(errc::schema_violation,
                  "provider joint table dim '" + joint.dims[d] + "' mismatches the marginals");
  }
  return joint;
}

namespace {

// max over categories of the relative deviation |projection - target| / target;
// a zero target with positive projection counts as full deviation
double marginal_deviation(const JointTable& joint, std::size_t dim, const MarginalTable& m) {
  const auto proj = joint.project(dim);
  double dev = 0;
  for (std::size_t c = 0; c < proj.size(); ++c) {
    const double target = m.counts[c];
    if (target > 0) {
      dev = std::max(dev, std::fabs(proj[c] - target) / target);
    } else if (proj[c] > 0) {
      dev = std::max(dev, 1.0);
    }
  }
  return dev;
}

}  // namespace

JointTable ipf_fit(JointTable seed, const std::vector<MarginalTable>& marginals, double tol,
                   int max_iter) {
  seed.validate();
  if (marginals.size() != seed.dims.size())
    throw_error(errc::invalid_argument, "ipf_fit: one marginal per joint dim required");
  for (std::size_t d = 0; d < marginals.size(); ++d) {
    marginals[d].validate();
    if (marginals[d].attribute_id != seed.dims[d] ||
        marginals[d].counts.size() != seed.shape[d])
      throw_error(errc::invalid_argument,
                  "ipf_fit: marginal '" + marginals[d].attribute_id +
                      "' does not match seed dim " + std::to_string(d));
  }

  // a positive target category with zero seed support can never be reached
  for (std::size_t d = 0; d < marginals.size(); ++d) {
    const auto proj = seed.project(d);
    for (std::size_t c = 0; c < proj.size(); ++c) {
      if (marginals[d].counts[c] > 0 && !(proj[c] > 0))
        throw_error(errc::structural_zero,
                    "ipf_fit: marginal '" + marginals[d].attribute_id + "' category '" +
                        marginals[d].labels[c] + "' has no seed support");
    }
  }

  const auto& ops = kernels::active_ops();
  std::vector<double> factors;
  for (int iter = 0;; ++iter) {
    double dev = 0;
    for (std::size_t d = 0; d < marginals.size(); ++d)
      dev = std::max(dev, marginal_deviation(seed, d, marginals[d]));
    if (dev <= tol) break;
    if (iter >= max_iter)
      throw_error(errc::no_convergence, "ipf_fit: deviation " + std::to_string(dev) +
                                            " after " + std::to_string(max_iter) + " sweeps");

    for (std::size_t d = 0; d < marginals.size(); ++d) {
      const auto proj = seed.project(d);
      factors.assign(proj.size(), 0.0);
      for (std::size_t c = 0; c < proj.size(); ++c) {
        if (proj[c] > 0) {
          factors[c] = marginals[d].counts[c] / proj[c];
        } else if (marginals[d].counts[c] > 0) {
          throw_error(errc::structural_zero,
                      "ipf_fit: category '" + marginals[d].labels[c] +
                          "' lost all support during fitting");
        }
      }
      ops.axis_scale(seed.cells.data(), seed.cells.size(), factors.data(), factors.size(),
                     seed.stride(d));
    }
  }

  seed.total = marginals.front().total;
  return seed;
}

// ---------------------------------------------------------------------------

ModePrefs mode_prefs_for(const std::string& occupation, std::uint64_t master_seed,
                         std::int64_t agent_id) {
  ModePrefs base;
  switch (classify_occupation(occupation)) {
    case OccupationClass::office_worker: base = {0.25, 0.45, 0.30}; break;
    case OccupationClass::student: base = {0.35, 0.50, 0.15}; break;
    case OccupationClass::retiree: base = {0.45, 0.35, 0.20}; break;
    case OccupationClass::service_worker: base = {0.20, 0.35, 0.45}; break;
  }
  auto stream = rng::derive_stream(master_seed, static_cast<std::uint64_t>(agent_id),
                                   "mode_prefs");
  double w[3] = {base.walk, base.transit, base.drive};
  double sum = 0;
  for (double& x : w) {
    x = std::max(0.0, x + stream.next_double(-0.05, 0.05));
    sum += x;
  }
  return ModePrefs{w[0] / sum, w[1] / sum, w[2] / sum};
}

std::vector<AgentProfile> sample_profiles(const JointTable& joint, std::int64_t n,
                                          const SalaryBands& bands, std::uint64_t master_seed) {
  joint.validate();
  bands.validate();
  if (n < 0) throw_error(errc::invalid_argument, "sample_profiles: n must be >= 0");
  if (n == 0) return {};
  if (!(joint.mass() > 0))
    throw_error(errc::empty_joint, "sample_profiles: joint table carries no mass");

  // find the profile attribute dims once
  const auto dim_of = [&](std::string_view id) -> std::size_t {
    for (std::size_t d = 0; d < joint.dims.size(); ++d)
      if (joint.dims[d] == id) return d;
    throw_error(errc::invalid_argument,
                "sample_profiles: joint table lacks required attribute '" + std::string(id) +
                    "'");
  };
  const std::size_t d_age = dim_of("age_band");
  const std::size_t d_edu = dim_of("education");
  const std::size_t d_occ = dim_of("occupation");
  const std::size_t d_inc = dim_of("income_band");

  std::vector<double> cdf(joint.cells.size());
  double acc = 0;
  for (std::size_t i = 0; i < joint.cells.size(); ++i) {
    acc += joint.cells[i];
    cdf[i] = acc;
  }

  const auto category_at = [&](std::size_t flat, std::size_t dim) -> const std::string& {
    return joint.labels[dim][(flat / joint.stride(dim)) % joint.shape[dim]];
  };

  std::vector<AgentProfile> profiles;
  profiles.reserve(static_cast<std::size_t>(n));
  for (std::int64_t id = 0; id < n; ++id) {
    auto stream = rng::derive_stream(master_seed, static_cast<std::uint64_t>(id), "profile");
    const double u = stream.next_double() * acc;
    // upper_bound skips zero-mass cells at CDF plateaus
    std::size_t flat = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) -
                                                cdf.begin());
    if (flat >= cdf.size()) flat = cdf.size() - 1;

    AgentProfile p;
    p.agent_id = id;
    p.age_band = category_at(flat, d_age);
    p.education = category_at(flat, d_edu);
    p.occupation = category_at(flat, d_occ);
    p.income_band = category_at(flat, d_inc);
    const auto& band = bands.lookup(p.income_band);
    p.monthly_income = stream.next_double(band.min_monthly, band.max_monthly);
    p.mode_prefs = mode_prefs_for(p.occupation, master_seed, id);
    profiles.push_back(std::move(p));
  }
  return profiles;
}

// ---------------------------------------------------------------------------

ordered_json profile_to_json(const AgentProfile& p) {
  ordered_json j;
  j["agent_id"] = p.agent_id;
  j["age_band"] = p.age_band;
  j["education"] = p.education;
  j["occupation"] = p.occupation;
  j["income_band"] = p.income_band;
  j["monthly_income"] = p.monthly_income;
  j["mode_prefs"] = ordered_json{{"walk", p.mode_prefs.walk},
                                 {"transit", p.mode_prefs.transit},
                                 {"drive", p.mode_prefs.drive}};
  j["home_cell_id"] = p.home_cell_id ? ordered_json(*p.home_cell_id) : ordered_json(nullptr);
  j["routine_poi_id"] =
      p.routine_poi_id ? ordered_json(*p.routine_poi_id) : ordered_json(nullptr);
  return j;
}

AgentProfile profile_from_json(const json& j) {
  AgentProfile p;
  p.agent_id = j.at("agent_id").get<std::int64_t>();
  p.age_band = j.at("age_band").get<std::string>();
  p.education = j.at("education").get<std::string>();
  p.occupation = j.at("occupation").get<std::string>();
  p.income_band = j.at("income_band").get<std::string>();
  p.monthly_income = j.at("monthly_income").get<double>();
  p.mode_prefs.walk = j.at("mode_prefs").at("walk").get<double>();
  p.mode_prefs.transit = j.at("mode_prefs").at("transit").get<double>();
  p.mode_prefs.drive = j.at("mode_prefs").at("drive").get<double>();
  if (!j.at("home_cell_id").is_null()) p.home_cell_id = j["home_cell_id"].get<std::int64_t>();
  if (!j.at("routine_poi_id").is_null())
    p.routine_poi_id = j["routine_poi_id"].get<std::int64_t>();
  return p;
}

void write_profiles_jsonl(const std::vector<AgentProfile>& profiles, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_error(errc::io_failure, "cannot open for writing: " + path);
  for (const auto& p : profiles) out << profile_to_json(p).dump() << '\n';
  if (!out) throw_error(errc::io_failure, "write failed: " + path);
}

std::vector<AgentProfile> read_profiles_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(errc::missing_file, "cannot open: " + path);
  std::vector<AgentProfile> profiles;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded())
      throw_error(errc::malformed_row, path + ":" + std::to_string(line_no) + ": not JSON");
    profiles.push_back(profile_from_json(parsed));
  }
  return profiles;
}

}  // namespace usim::population
