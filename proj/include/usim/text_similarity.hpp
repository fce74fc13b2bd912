#pragma once

#include <map>
#include <string>
#include <string_view>

namespace usim::text {

// Character-trigram frequency profile of lowercased text. Texts shorter than
// three characters contribute themselves as a single gram; empty text has an
// empty profile.
std::map<std::string, int> trigram_profile(std::string_view s);

// Cosine similarity between trigram profiles, in [0, 1]. Zero when either
// text is empty.
double trigram_cosine(std::string_view a, std::string_view b);

}  // namespace usim::text
