#include "usim/occupation.hpp"

#include <array>
#include <cctype>

#include "usim/rng.hpp"

namespace usim {

std::string_view to_string(OccupationClass c) {
  switch (c) {
    case OccupationClass::office_worker: return "office-worker";
    case OccupationClass::student: return "student";
    case OccupationClass::retiree: return "retiree";
    case OccupationClass::service_worker: return "service-worker";
  }
  return "office-worker";
}

namespace {

bool contains_any(const std::string& s, std::initializer_list<const char*> words) {
  for (const char* w : words) {
    if (s.find(w) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

OccupationClass classify_occupation(std::string_view occupation) {
  std::string low(occupation);
  for (char& c : low) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

  if (contains_any(low, {"student", "pupil"})) return OccupationClass::student;
  if (contains_any(low, {"retire", "pension"})) return OccupationClass::retiree;
  if (contains_any(low, {"driver", "sales", "server", "waiter", "cook", "chef", "cashier",
                         "barista", "nurse", "police", "guard", "cleaner", "retail"})) {
    return OccupationClass::service_worker;
  }
  if (contains_any(low, {"teacher", "engineer", "manager", "analyst", "accountant", "clerk",
                         "office", "designer", "researcher", "programmer", "scientist",
                         "professor", "lawyer", "doctor"})) {
    return OccupationClass::office_worker;
  }
  static constexpr std::array<OccupationClass, 4> classes{
      OccupationClass::office_worker, OccupationClass::student, OccupationClass::retiree,
      OccupationClass::service_worker};
  return classes[rng::mix64(rng::fnv1a(low)) % classes.size()];
}

}  // namespace usim
