#include "modechoice/timestamp.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace modechoice {
namespace {

int read_int(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) throw std::invalid_argument("truncated timestamp");
  int value = 0;
  const char* first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc{} || ptr != first + len) {
    throw std::invalid_argument("non-numeric field in timestamp");
  }
  return value;
}

void expect(std::string_view text, std::size_t pos, std::string_view allowed) {
  if (pos >= text.size() || allowed.find(text[pos]) == std::string_view::npos) {
    throw std::invalid_argument("unexpected separator in timestamp");
  }
}

}  // namespace

LocalTime parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  try {
    // YYYY-MM-DDTHH:MM[:SS]
    if (text.size() != 16 && text.size() != 19) {
      throw std::invalid_argument("expected YYYY-MM-DDTHH:MM[:SS]");
    }
    const int y = read_int(text, 0, 4);
    expect(text, 4, "-");
    const int mo = read_int(text, 5, 2);
    expect(text, 7, "-");
    const int d = read_int(text, 8, 2);
    expect(text, 10, "T ");
    const int hh = read_int(text, 11, 2);
    expect(text, 13, ":");
    const int mm = read_int(text, 14, 2);
    int ss = 0;
    if (text.size() == 19) {
      expect(text, 16, ":");
      ss = read_int(text, 17, 2);
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                             day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) {
      throw std::invalid_argument("field out of range");
    }
    return local_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(fmt::format("invalid timestamp '{}': {}", text, e.what()));
  }
}

std::string format_timestamp(LocalTime t) {
  using namespace std::chrono;
  const auto day_start = floor<days>(t);
  const year_month_day ymd{day_start};
  const auto secs = (t - day_start).count();
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     secs / 3600, (secs / 60) % 60, secs % 60);
}

double minutes_between(LocalTime a, LocalTime b) noexcept {
  return std::abs(static_cast<double>((a - b).count())) / 60.0;
}

unsigned month_of(LocalTime t) noexcept {
  using namespace std::chrono;
  return static_cast<unsigned>(year_month_day{floor<days>(t)}.month());
}

int minute_of_day(LocalTime t) noexcept {
  using namespace std::chrono;
  return static_cast<int>((t - floor<days>(t)).count() / 60);
}

}  // namespace modechoice
