#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace usim::providers {

enum class TaskKind { joint_seed, occupation_description, daily_schedule };
std::string_view to_string(TaskKind kind);

enum class Mode { live, stub };

// registered response schema ids
inline constexpr std::string_view kJointTableSchema = "joint_table.v1";
inline constexpr std::string_view kOccupationDescriptionSchema = "occupation_description.v1";
inline constexpr std::string_view kDailyScheduleSchema = "daily_schedule.v1";

struct PromptRequest {
  TaskKind task_kind = TaskKind::joint_seed;
  std::string system_text;
  std::string user_text;
  std::string response_schema_id;
  double temperature = 0.0;
};

struct StructuredResponse {
  nlohmann::json value;
  std::string raw_text;
  Mode provider_mode = Mode::stub;
};

struct ProviderConfig {
  Mode mode = Mode::stub;
  std::string endpoint_url;
  std::string model_name;
  double timeout_s = 30.0;
  int max_retries = 2;
  std::uint64_t stub_seed = 0;
  // half-width of the stub joint-seed multiplicative band; 0 disables the
  // perturbation entirely (pure product of marginals)
  double stub_perturbation = 0.1;

  void validate() const;  // live mode requires an endpoint
};

struct Schema {
  std::string id;
  std::string instructions;  // appended to the live-mode system prompt
  // nullopt = document conforms; otherwise the violation text
  std::function<std::optional<std::string>(const nlohmann::json&)> validate;
};

bool schema_registered(std::string_view id);
const Schema& schema_for(std::string_view id);  // throws errc::unknown_schema

// Deterministic offline provider: the response is a pure function of
// (request, seed, perturbation). See the schema instructions for the
// request payload each task kind expects in user_text.
StructuredResponse stub_generate(const PromptRequest& request, std::uint64_t seed,
                                 double perturbation = 0.1);

// Uniform entry point. Stub mode never touches the network; live mode POSTs a
// single-turn chat completion and retries on schema violations with the
// violation appended to the prompt. Environment overrides: USIM_LLM_ENDPOINT,
// USIM_LLM_API_KEY.
StructuredResponse complete_structured(const PromptRequest& request, const ProviderConfig& config);

}  // namespace usim::providers
