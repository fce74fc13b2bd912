#include "usim/providers.hpp"

#include <cstdlib>
#include <vector>

#include <httplib.h>

#include "usim/error.hpp"
#include "usim/occupation.hpp"
#include "usim/rng.hpp"

namespace usim::providers {

using nlohmann::json;

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::joint_seed: return "joint_seed";
    case TaskKind::occupation_description: return "occupation_description";
    case TaskKind::daily_schedule: return "daily_schedule";
  }
  return "joint_seed";
}

namespace {

const char* endpoint_override() { return std::getenv("USIM_LLM_ENDPOINT"); }

std::optional<std::string> check_joint_table(const json& v) {
  if (!v.is_object()) return "document must be a JSON object";
  for (const char* key : {"dims", "labels", "shape", "cells", "total"}) {
    if (!v.contains(key)) return std::string("missing key '") + key + "'";
  }
  if (!v["dims"].is_array() || v["dims"].size() < 2) return "'dims' must list >= 2 attributes";
  if (!v["labels"].is_array() || v["labels"].size() != v["dims"].size())
    return "'labels' must have one label list per dim";
  if (!v["shape"].is_array() || v["shape"].size() != v["dims"].size())
    return "'shape' must have one extent per dim";
  std::size_t expected = 1;
  for (std::size_t d = 0; d < v["shape"].size(); ++d) {
    if (!v["shape"][d].is_number_integer() || v["shape"][d].get<std::int64_t>() <= 0)
      return "'shape' entries must be positive integers";
    if (!v["labels"][d].is_array() ||
        v["labels"][d].size() != v["shape"][d].get<std::size_t>())
      return "label list length must match shape";
    expected *= v["shape"][d].get<std::size_t>();
  }
  if (!v["cells"].is_array() || v["cells"].size() != expected)
    return "'cells' length must equal the product of 'shape'";
  double sum = 0;
  for (const auto& c : v["cells"]) {
    if (!c.is_number()) return "'cells' entries must be numbers";
    const double x = c.get<double>();
    if (!(x >= 0) || !std::isfinite(x)) return "'cells' entries must be finite and >= 0";
    sum += x;
  }
  if (!(sum > 0)) return "'cells' must carry positive total mass";
  if (!v["total"].is_number() || !(v["total"].get<double>() > 0)) return "'total' must be > 0";
  return std::nullopt;
}

std::optional<std::string> check_occupation_description(const json& v) {
  if (!v.is_object()) return "document must be a JSON object";
  if (!v.contains("occupation") || !v["occupation"].is_string())
    return "missing string key 'occupation'";
  if (!v.contains("description") || !v["description"].is_string() ||
      v["description"].get<std::string>().empty())
    return "missing non-empty string key 'description'";
  return std::nullopt;
}

std::optional<std::string> check_daily_schedule(const json& v) {
  if (!v.is_object() || !v.contains("activities") || !v["activities"].is_array())
    return "document must be an object with an 'activities' array";
  if (v["activities"].empty()) return "'activities' must be non-empty";
  for (const auto& a : v["activities"]) {
    if (!a.is_object()) return "activity entries must be objects";
    if (!a.contains("label") || !a["label"].is_string()) return "activity missing string 'label'";
    if (!a.contains("kind") || !a["kind"].is_string()) return "activity missing string 'kind'";
    const std::string kind = a["kind"].get<std::string>();
    if (kind != "home" && kind != "routine" && kind != "occasional")
      return "activity 'kind' must be home|routine|occasional";
    for (const char* key : {"start_s", "end_s"}) {
      if (!a.contains(key) || !a[key].is_number_integer())
        return std::string("activity missing integer '") + key + "'";
    }
    const auto start = a["start_s"].get<std::int64_t>();
    const auto end = a["end_s"].get<std::int64_t>();
    if (start < 0 || end > 86400 || start >= end)
      return "activity times must satisfy 0 <= start < end <= 86400";
  }
  return std::nullopt;
}

const std::vector<Schema>& registry() {
  static const std::vector<Schema> schemas = {
      {std::string(kJointTableSchema),
       "Reply with one JSON object: {\"dims\": [attribute ids], \"labels\": [[category labels] "
       "per dim], \"shape\": [category counts per dim], \"cells\": [flattened row-major "
       "non-negative counts], \"total\": population total}. The request carries the marginal "
       "counts per attribute; estimate a plausible joint distribution consistent with them.",
       &check_joint_table},
      {std::string(kOccupationDescriptionSchema),
       "Reply with one JSON object: {\"occupation\": the occupation label, \"description\": "
       "one or two sentences describing the daily work}.",
       &check_occupation_description},
      {std::string(kDailyScheduleSchema),
       "Reply with one JSON object: {\"activities\": [{\"label\": short activity name, "
       "\"kind\": \"home\"|\"routine\"|\"occasional\", \"start_s\": seconds of day, \"end_s\": "
       "seconds of day}]}. Activities must be chronological, non-overlapping, start and end at "
       "home, and leave gaps for travel.",
       &check_daily_schedule},
  };
  return schemas;
}

}  // namespace

bool schema_registered(std::string_view id) {
  for (const auto& s : registry()) {
    if (s.id == id) return true;
  }
  return false;
}

const Schema& schema_for(std::string_view id) {
  for (const auto& s : registry()) {
    if (s.id == id) return s;
  }
  throw_error(errc::unknown_schema, "unknown response schema: " + std::string(id));
}

void ProviderConfig::validate() const {
  if (mode == Mode::live && endpoint_url.empty() && endpoint_override() == nullptr)
    throw_error(errc::invalid_argument, "live provider mode requires endpoint_url");
  if (max_retries < 0) throw_error(errc::invalid_argument, "max_retries must be >= 0");
  if (stub_perturbation < 0 || stub_perturbation >= 1)
    throw_error(errc::invalid_argument, "stub_perturbation must lie in [0, 1)");
}

// ---------------------------------------------------------------------------
// stub
// ---------------------------------------------------------------------------

namespace {

json stub_joint_seed(const PromptRequest& request, std::uint64_t seed, double perturbation) {
  json payload;
  try {
    payload = json::parse(request.user_text);
  } catch (const json::parse_error& e) {
    throw_error(errc::invalid_argument,
                std::string("joint_seed request payload is not JSON: ") + e.what());
  }
  if (!payload.contains("attributes") || !payload["attributes"].is_array() ||
      payload["attributes"].size() < 2 || !payload.contains("total")) {
    throw_error(errc::invalid_argument,
                "joint_seed request payload needs >= 2 'attributes' and a 'total'");
  }
  const double total = payload["total"].get<double>();

  json dims = json::array(), labels = json::array(), shape = json::array();
  std::vector<std::vector<double>> counts;
  std::size_t n_cells = 1;
  for (const auto& attr : payload["attributes"]) {
    dims.push_back(attr["attribute_id"].get<std::string>());
    labels.push_back(attr["labels"]);
    counts.push_back(attr["counts"].get<std::vector<double>>());
    shape.push_back(counts.back().size());
    n_cells *= counts.back().size();
  }

  // independence product scaled to the population total, then a deterministic
  // multiplicative nudge per cell inside [1-p, 1+p], renormalized back
  std::vector<double> cells(n_cells);
  double mass = 0;
  for (std::size_t i = 0; i < n_cells; ++i) {
    double cell = total;
    std::size_t rest = i;
    for (std::size_t d = dims.size(); d-- > 0;) {
      const auto& c = counts[d];
      cell *= c[rest % c.size()] / total;
      rest /= c.size();
    }
    if (perturbation > 0) cell *= 1.0 + perturbation * (2.0 * rng::hash01(seed, i) - 1.0);
    cells[i] = cell;
    mass += cell;
  }
  if (mass > 0) {
    const double scale = total / mass;
    for (double& c : cells) c *= scale;
  }

  return json{{"dims", dims}, {"labels", labels}, {"shape", shape}, {"cells", cells},
              {"total", total}};
}

json stub_occupation_description(const PromptRequest& request) {
  const std::string& occupation = request.user_text;
  return json{{"occupation", occupation},
              {"description", "A person working as " + occupation +
                                  ". Typical days revolve around " + occupation +
                                  " duties at the workplace."}};
}

struct ActivityTemplate {
  const char* label;
  const char* kind;
  int start_s;
  int end_s;
};

json stub_daily_schedule(const PromptRequest& request) {
  json payload;
  std::string occupation;
  try {
    payload = json::parse(request.user_text);
    occupation = payload.value("occupation", "");
  } catch (const json::parse_error&) {
    occupation = request.user_text;
  }

  static const std::vector<ActivityTemplate> office = {
      {"home", "home", 0, 28800},
      {"work", "routine", 32400, 64800},
      {"dinner", "occasional", 66600, 72000},
      {"home", "home", 73800, 86400},
  };
  static const std::vector<ActivityTemplate> student = {
      {"home", "home", 0, 26400},
      {"class", "routine", 28800, 57600},
      {"after-school snack", "occasional", 59400, 63000},
      {"home", "home", 64800, 86400},
  };
  static const std::vector<ActivityTemplate> retiree = {
      {"home", "home", 0, 30600},
      {"morning market trip", "occasional", 32400, 37800},
      {"home", "home", 39600, 50400},
      {"afternoon walk in the park", "occasional", 52200, 57600},
      {"home", "home", 59400, 86400},
  };
  static const std::vector<ActivityTemplate> service = {
      {"home", "home", 0, 32400},
      {"shift", "routine", 36000, 72000},
      {"late dinner", "occasional", 73800, 77400},
      {"home", "home", 79200, 86400},
  };

  const std::vector<ActivityTemplate>* tmpl = &office;
  switch (classify_occupation(occupation)) {
    case OccupationClass::office_worker: tmpl = &office; break;
    case OccupationClass::student: tmpl = &student; break;
    case OccupationClass::retiree: tmpl = &retiree; break;
    case OccupationClass::service_worker: tmpl = &service; break;
  }

  json activities = json::array();
  for (const auto& a : *tmpl) {
    activities.push_back(
        json{{"label", a.label}, {"kind", a.kind}, {"start_s", a.start_s}, {"end_s", a.end_s}});
  }
  return json{{"activities", activities}};
}

}  // namespace

StructuredResponse stub_generate(const PromptRequest& request, std::uint64_t seed,
                                 double perturbation) {
  const Schema& schema = schema_for(request.response_schema_id);

  json value;
  switch (request.task_kind) {
    case TaskKind::joint_seed: value = stub_joint_seed(request, seed, perturbation); break;
    case TaskKind::occupation_description: value = stub_occupation_description(request); break;
    case TaskKind::daily_schedule: value = stub_daily_schedule(request); break;
  }

  if (auto violation = schema.validate(value)) {
    throw_error(errc::schema_violation, "stub produced a non-conforming document: " + *violation);
  }
  return StructuredResponse{value, value.dump(), Mode::stub};
}

// ---------------------------------------------------------------------------
// live
// ---------------------------------------------------------------------------

namespace {

struct ParsedUrl {
  std::string base;  // scheme://host[:port]
  std::string path;  // /... (at least "/")
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw_error(errc::invalid_argument, "endpoint_url must carry a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

// accept either {"content": "..."} or an OpenAI-style chat completion
std::string extract_content(const json& body) {
  if (body.contains("content") && body["content"].is_string())
    return body["content"].get<std::string>();
  if (body.contains("choices") && body["choices"].is_array() && !body["choices"].empty()) {
    const auto& msg = body["choices"][0];
    if (msg.contains("message") && msg["message"].contains("content") &&
        msg["message"]["content"].is_string())
      return msg["message"]["content"].get<std::string>();
  }
  throw_error(errc::schema_violation, "response carries no content field");
}

// models often wrap JSON in markdown fences; keep the outermost object
std::optional<json> parse_document(const std::string& text) {
  const auto first = text.find('{');
  const auto last = text.rfind('}');
  if (first == std::string::npos || last == std::string::npos || last < first)
    return std::nullopt;
  const auto parsed = json::parse(text.substr(first, last - first + 1), nullptr, false);
  if (parsed.is_discarded()) return std::nullopt;
  return parsed;
}

StructuredResponse complete_live(const PromptRequest& request, const ProviderConfig& config) {
  const Schema& schema = schema_for(request.response_schema_id);

  std::string endpoint = config.endpoint_url;
  if (const char* env = endpoint_override()) endpoint = env;
  const ParsedUrl url = parse_url(endpoint);

  httplib::Client client(url.base);
  client.set_connection_timeout(std::chrono::duration<double>(config.timeout_s));
  client.set_read_timeout(std::chrono::duration<double>(config.timeout_s));

  httplib::Headers headers;
  if (const char* key = std::getenv("USIM_LLM_API_KEY"))
    headers.emplace("Authorization", std::string("Bearer ") + key);

  std::string user_text = request.user_text;
  std::string last_violation;
  std::string last_transport;

  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    const json body{
        {"model", config.model_name},
        {"temperature", request.temperature},
        {"messages",
         json::array({json{{"role", "system"},
                           {"content", request.system_text + "\n\n" + schema.instructions}},
                      json{{"role", "user"}, {"content", user_text}}})},
    };

    auto res = client.Post(url.path, headers, body.dump(), "application/json");
    if (!res) {
      last_transport = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_transport = "HTTP status " + std::to_string(res->status);
      continue;
    }

    std::string content;
    try {
      content = extract_content(json::parse(res->body, nullptr, false));
    } catch (const error&) {
      last_violation = "response body carries no content";
      continue;
    }

    const auto doc = parse_document(content);
    std::optional<std::string> violation =
        doc ? schema.validate(*doc) : std::optional<std::string>("content is not a JSON document");
    if (!violation) return StructuredResponse{*doc, content, Mode::live};

    last_violation = *violation;
    user_text = request.user_text +
                "\n\nThe previous reply violated the response contract: " + *violation +
                "\nReturn ONLY a corrected JSON document.";
  }

  if (last_violation.empty() && !last_transport.empty())
    throw_error(errc::transport, "endpoint unreachable: " + last_transport);
  throw_error(errc::schema_violation,
              "no conforming response after " + std::to_string(config.max_retries + 1) +
                  " attempts; last violation: " + last_violation);
}

}  // namespace

StructuredResponse complete_structured(const PromptRequest& request,
                                       const ProviderConfig& config) {
  config.validate();
  if (!schema_registered(request.response_schema_id))
    throw_error(errc::unknown_schema,
                "unknown response schema: " + request.response_schema_id);
  if (config.mode == Mode::stub)
    return stub_generate(request, config.stub_seed, config.stub_perturbation);
  return complete_live(request, config);
}

}  // namespace usim::providers
