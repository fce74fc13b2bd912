#pragma once

#include <string>
#include <string_view>

namespace usim {

// Coarse behavioural classes behind the stub schedule templates and the
// per-class mode preference priors.
enum class OccupationClass { office_worker, student, retiree, service_worker };

std::string_view to_string(OccupationClass c);

// Keyword match on the lowercased label; labels matching no keyword fall back
// to a hash of the label so classification stays total and deterministic.
OccupationClass classify_occupation(std::string_view occupation);

}  // namespace usim
