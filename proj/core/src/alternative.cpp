#include "modechoice/alternative.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace modechoice {
namespace {

constexpr std::array<std::string_view, kNumAlternatives> kIds = {
    "PersonalVehicle", "PublicTransport", "Walk", "OtherMode"};
constexpr std::array<std::string_view, kNumAlternatives> kDisplay = {
    "Personal Vehicle", "Public Transport", "Walk", "Other Mode"};

std::string fold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == ' ' || c == '_' || c == '-') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

std::string_view to_string(Alternative a) noexcept { return kIds[index_of(a)]; }

std::string_view display_name(Alternative a) noexcept { return kDisplay[index_of(a)]; }

std::optional<Alternative> parse_alternative(std::string_view text) noexcept {
  const std::string key = fold(text);
  for (std::size_t i = 0; i < kNumAlternatives; ++i) {
    if (key == fold(kIds[i])) return alternative_at(i);
  }
  return std::nullopt;
}

std::size_t count_available(const AvailabilityMask& mask) noexcept {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

}  // namespace modechoice
