#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace modechoice {

/// The four travel-mode alternatives of the choice set. The enumerator value is
/// the ordinal index used for every per-alternative array in the library.
enum class Alternative : std::uint8_t {
  PersonalVehicle = 0,
  PublicTransport = 1,
  Walk = 2,
  OtherMode = 3,
};

inline constexpr std::size_t kNumAlternatives = 4;

inline constexpr std::array<Alternative, kNumAlternatives> kAllAlternatives = {
    Alternative::PersonalVehicle, Alternative::PublicTransport, Alternative::Walk,
    Alternative::OtherMode};

using AvailabilityMask = std::array<bool, kNumAlternatives>;
using PerAlternative = std::array<double, kNumAlternatives>;

inline constexpr AvailabilityMask kAllAvailable = {true, true, true, true};

constexpr std::size_t index_of(Alternative a) noexcept {
  return static_cast<std::size_t>(a);
}

constexpr Alternative alternative_at(std::size_t index) noexcept {
  return static_cast<Alternative>(index);
}

/// Canonical identifier, e.g. "PersonalVehicle".
std::string_view to_string(Alternative a) noexcept;

/// Human-readable label, e.g. "Personal Vehicle".
std::string_view display_name(Alternative a) noexcept;

/// Accepts the canonical identifier or the display name (case-insensitive).
std::optional<Alternative> parse_alternative(std::string_view text) noexcept;

std::size_t count_available(const AvailabilityMask& mask) noexcept;

}  // namespace modechoice
