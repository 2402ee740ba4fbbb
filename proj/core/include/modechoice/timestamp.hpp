#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace modechoice {

/// Wall-clock time without a zone; all survey and station times are local.
using LocalTime = std::chrono::local_seconds;

/// Parses "YYYY-MM-DDTHH:MM[:SS]" (a space is accepted in place of 'T').
/// Throws std::invalid_argument on anything else.
LocalTime parse_timestamp(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SS".
std::string format_timestamp(LocalTime t);

/// Absolute gap in minutes.
double minutes_between(LocalTime a, LocalTime b) noexcept;

unsigned month_of(LocalTime t) noexcept;

/// Minutes after local midnight, 0..1439.
int minute_of_day(LocalTime t) noexcept;

}  // namespace modechoice
