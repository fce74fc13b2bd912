#include "usim/text_similarity.hpp"

#include <cctype>
#include <cmath>

namespace usim::text {

namespace {

std::string lowercased(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::map<std::string, int> trigram_profile(std::string_view s) {
  std::map<std::string, int> profile;
  const std::string low = lowercased(s);
  if (low.empty()) return profile;
  if (low.size() < 3) {
    profile[low] = 1;
    return profile;
  }
  for (std::size_t i = 0; i + 3 <= low.size(); ++i) ++profile[low.substr(i, 3)];
  return profile;
}

double trigram_cosine(std::string_view a, std::string_view b) {
  const auto pa = trigram_profile(a);
  const auto pb = trigram_profile(b);
  if (pa.empty() || pb.empty()) return 0.0;

  double dot = 0;
  for (const auto& [gram, count] : pa) {
    auto it = pb.find(gram);
    if (it != pb.end()) dot += static_cast<double>(count) * it->second;
  }
  double na = 0, nb = 0;
  for (const auto& [gram, count] : pa) na += static_cast<double>(count) * count;
  for (const auto& [gram, count] : pb) nb += static_cast<double>(count) * count;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace usim::text
