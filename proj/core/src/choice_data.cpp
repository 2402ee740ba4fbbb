#include "modechoice/choice_data.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "modechoice/csv.hpp"
#include "modechoice/errors.hpp"
#include "modechoice/parallel.hpp"

namespace modechoice {
namespace {

constexpr std::array kSurveyModes = {
    SurveyMode::Walk,          SurveyMode::Bicycle,
    SurveyMode::Car,           SurveyMode::Suv,
    SurveyMode::Van,           SurveyMode::PickupTruck,
    SurveyMode::GolfCart,      SurveyMode::Motorcycle,
    SurveyMode::RecreationalVehicle, SurveyMode::SchoolBus,
    SurveyMode::PublicBus,     SurveyMode::Paratransit,
    SurveyMode::PrivateBus,    SurveyMode::CityToCityBus,
    SurveyMode::Amtrak,        SurveyMode::Subway,
    SurveyMode::Taxi,          SurveyMode::RentalCar,
    SurveyMode::Airplane,      SurveyMode::Boat,
    SurveyMode::SomethingElse,
};

constexpr std::array<std::string_view, 31> kRequiredColumns = {
    "person_id",    "trip_id",      "age",          "gender",       "worker",
    "driver",       "race",         "hispanic",     "education",    "income",
    "disability",   "health_poor",  "born_in_us",   "works_from_home", "mode",
    "trip_miles",   "trip_minutes", "origin_lat",   "origin_lon",   "dest_lat",
    "dest_lon",     "start_time",   "end_time",     "origin_urban", "dest_urban",
    "origin_nyc",   "dest_nyc",     "trip_purpose", "home_based",   "travel_month",
    "weekday"};

constexpr std::array<std::string_view, 5> kStandardDevices = {
    "cane", "walker", "manual_wheelchair", "crutch", "dog_assistance"};

constexpr std::string_view kPassthroughPrefix = "cov_";

std::string lower(std::string_view s) {
  std::string out(csv::trim(s));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<double> indicator(std::optional<bool> flag) {
  if (!flag) return std::nullopt;
  return *flag ? 1.0 : 0.0;
}

// Emits a mutually exclusive indicator family. `which` is the index of the
// active member, or nullopt when the underlying field is missing.
void emit_family(CovariateMap& out, std::span<const std::string_view> names,
                 std::optional<std::size_t> which) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    out[std::string(names[i])] =
        which ? std::optional<double>(*which == i ? 1.0 : 0.0) : std::nullopt;
  }
}

std::optional<double> positive_log(std::optional<double> v) {
  if (!v || !(*v > 0.0) || !std::isfinite(*v)) return std::nullopt;
  return std::log(*v);
}

// --- field parsers (all throw InputError tagged with the row) --------------

struct FieldReader {
  const csv::Table& table;
  const std::vector<std::string>& row;
  std::size_t row_number;

  std::string_view raw(std::string_view column) const {
    auto idx = table.column(column);
    if (!idx) return {};
    return csv::trim(row[*idx]);
  }

  [[noreturn]] void fail(std::string_view column, std::string_view why) const {
    throw InputError(fmt::format("column '{}': {} (value '{}')", column, why, raw(column)),
                     row_number);
  }

  std::optional<double> real(std::string_view column) const {
    const auto s = raw(column);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
      fail(column, "not a finite number");
    }
    return v;
  }

  std::optional<long> integer(std::string_view column) const {
    const auto s = raw(column);
    if (s.empty()) return std::nullopt;
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) fail(column, "not an integer");
    return v;
  }

  long required_integer(std::string_view column) const {
    auto v = integer(column);
    if (!v) fail(column, "value required");
    return *v;
  }

  std::optional<bool> boolean(std::string_view column) const {
    const auto s = lower(raw(column));
    if (s.empty()) return std::nullopt;
    if (s == "1" || s == "true" || s == "yes" || s == "y") return true;
    if (s == "0" || s == "false" || s == "no" || s == "n") return false;
    fail(column, "not a boolean");
  }

  bool required_boolean(std::string_view column) const {
    auto v = boolean(column);
    if (!v) fail(column, "value required");
    return *v;
  }

  std::optional<LocalTime> time(std::string_view column) const {
    const auto s = raw(column);
    if (s.empty()) return std::nullopt;
    try {
      return parse_timestamp(s);
    } catch (const std::invalid_argument& e) {
      fail(column, e.what());
    }
  }

  std::optional<GeoPoint> point(std::string_view lat_col, std::string_view lon_col) const {
    auto lat = real(lat_col);
    auto lon = real(lon_col);
    if (!lat && !lon) return std::nullopt;
    if (!lat || !lon) fail(lat ? lon_col : lat_col, "coordinate pair incomplete");
    if (*lat < -90.0 || *lat > 90.0) fail(lat_col, "latitude outside [-90, 90]");
    if (*lon < -180.0 || *lon > 180.0) fail(lon_col, "longitude outside [-180, 180]");
    return GeoPoint{*lat, *lon};
  }
};

std::optional<Gender> parse_gender(const FieldReader& f) {
  const auto s = lower(f.raw("gender"));
  if (s.empty()) return std::nullopt;
  if (s == "male" || s == "m" || s == "1") return Gender::Male;
  if (s == "female" || s == "f" || s == "2") return Gender::Female;
  f.fail("gender", "expected male/female");
}

std::optional<Race> parse_race(const FieldReader& f) {
  const auto s = lower(f.raw("race"));
  if (s.empty()) return std::nullopt;
  return (s == "white" || s == "1") ? Race::White : Race::NonWhite;
}

std::optional<Education> parse_education(const FieldReader& f) {
  const auto s = lower(f.raw("education"));
  if (s.empty()) return std::nullopt;
  if (s == "less_than_bachelor" || s == "1" || s == "2" || s == "3") {
    return Education::LessThanBachelor;
  }
  if (s == "bachelor_or_higher" || s == "4" || s == "5") return Education::BachelorOrHigher;
  f.fail("education", "expected less_than_bachelor/bachelor_or_higher");
}

std::optional<IncomeBand> parse_income(const FieldReader& f) {
  const auto s = lower(f.raw("income"));
  if (s.empty()) return std::nullopt;
  if (s == "lt_50k") return IncomeBand::Under50k;
  if (s == "50k_75k") return IncomeBand::From50kTo75k;
  if (s == "75k_100k") return IncomeBand::From75kTo100k;
  if (s == "100k_200k") return IncomeBand::From100kTo200k;
  if (s == "200k_plus") return IncomeBand::Over200k;
  f.fail("income", "expected lt_50k/50k_75k/75k_100k/100k_200k/200k_plus");
}

std::optional<TripPurpose> parse_purpose(const FieldReader& f) {
  const auto s = lower(f.raw("trip_purpose"));
  if (s.empty()) return std::nullopt;
  return s == "work" ? TripPurpose::Work : TripPurpose::NonWork;
}

RawTripRecord parse_trip_row(const csv::Table& table, const std::vector<std::string>& row,
                             std::size_t row_number) {
  const FieldReader f{table, row, row_number};
  RawTripRecord r;
  r.person_id = std::string(f.raw("person_id"));
  if (r.person_id.empty()) f.fail("person_id", "value required");
  r.household_id = std::string(f.raw("household_id"));
  r.trip_id = std::string(f.raw("trip_id"));
  if (r.trip_id.empty()) f.fail("trip_id", "value required");
  r.age = static_cast<int>(f.required_integer("age"));
  r.gender = parse_gender(f);
  r.worker = f.boolean("worker");
  r.driver = f.boolean("driver");
  r.race = parse_race(f);
  r.hispanic = f.boolean("hispanic");
  r.education = parse_education(f);
  r.income = parse_income(f);
  r.disability = f.required_boolean("disability");
  if (table.column("medical_devices")) {
    r.medical_devices.emplace();
    const std::string devices = lower(f.raw("medical_devices"));
    std::size_t start = 0;
    while (start <= devices.size()) {
      const auto stop = std::min(devices.find(';', start), devices.size());
      const auto name = csv::trim(std::string_view(devices).substr(start, stop - start));
      if (!name.empty()) r.medical_devices->emplace(name);
      start = stop + 1;
    }
  }
  r.health_poor = f.boolean("health_poor");
  r.born_in_us = f.boolean("born_in_us");
  r.works_from_home = f.boolean("works_from_home");
  r.raw_mode = static_cast<int>(f.required_integer("mode"));
  try {
    collapse_mode(r.raw_mode);
  } catch (const InputError&) {
    f.fail("mode", "unrecognized survey mode code");
  }
  r.trip_miles = f.real("trip_miles");
  r.trip_minutes = f.real("trip_minutes");
  r.origin = f.point("origin_lat", "origin_lon");
  r.destination = f.point("dest_lat", "dest_lon");
  r.start_time = f.time("start_time");
  r.end_time = f.time("end_time");
  if (r.start_time && r.end_time && *r.end_time < *r.start_time) {
    f.fail("end_time", "end_time precedes start_time");
  }
  r.origin_urban = f.boolean("origin_urban");
  r.dest_urban = f.boolean("dest_urban");
  r.origin_nyc = f.boolean("origin_nyc");
  r.dest_nyc = f.boolean("dest_nyc");
  r.purpose = parse_purpose(f);
  r.home_based = f.boolean("home_based");
  if (auto m = f.integer("travel_month")) {
    if (*m < 1 || *m > 12) f.fail("travel_month", "month outside 1..12");
    r.travel_month = static_cast<unsigned>(*m);
  }
  r.weekday = f.boolean("weekday");
  if (auto w = f.real("weight")) {
    if (!(*w > 0.0)) f.fail("weight", "weight must be positive");
    r.weight = *w;
  }
  for (Alternative a : kAllAlternatives) r.availability[index_of(a)] = f.boolean(availability_column(a));
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const auto& name = table.header[c];
    if (name.size() > kPassthroughPrefix.size() && name.starts_with(kPassthroughPrefix)) {
      r.passthrough[name.substr(kPassthroughPrefix.size())] = f.real(name);
    }
  }
  return r;
}

std::optional<std::size_t> age_bin(int age) {
  if (age < kAdultAge) return std::nullopt;
  if (age <= 24) return 0;
  if (age <= 44) return 1;
  if (age <= 64) return 2;
  return 3;
}

std::size_t time_of_day_bin(int minute) {
  if (minute >= 7 * 60 && minute < 10 * 60) return 0;
  if (minute >= 10 * 60 && minute < 16 * 60) return 1;
  if (minute >= 16 * 60 && minute < 19 * 60) return 2;
  return 3;
}

template <class E>
std::optional<std::size_t> ordinal(std::optional<E> e) {
  if (!e) return std::nullopt;
  return static_cast<std::size_t>(*e);
}

std::optional<std::size_t> binary(std::optional<bool> b) {
  if (!b) return std::nullopt;
  return *b ? 0 : 1;
}

}  // namespace

std::span<const SurveyMode> all_survey_modes() noexcept { return kSurveyModes; }

std::optional<double> ChoiceObservation::covariate(std::string_view name) const {
  auto it = covariates.find(name);
  if (it == covariates.end()) return std::nullopt;
  return it->second;
}

void validate(const ChoiceObservation& obs) {
  if (count_available(obs.available) < 2) {
    throw InputError(fmt::format("observation '{}': fewer than two alternatives available",
                                 obs.obs_id));
  }
  if (!obs.available[index_of(obs.chosen)]) {
    throw InputError(fmt::format("observation '{}': chosen alternative {} is not available",
                                 obs.obs_id, to_string(obs.chosen)));
  }
  if (!(obs.weight > 0.0) || !std::isfinite(obs.weight)) {
    throw InputError(fmt::format("observation '{}': weight must be positive", obs.obs_id));
  }
}

std::vector<RawTripRecord> filter_tld_adults(std::span<const RawTripRecord> records) {
  std::vector<RawTripRecord> out;
  for (const auto& r : records) {
    if (r.disability && r.age >= kAdultAge) out.push_back(r);
  }
  return out;
}

Alternative collapse_mode(int raw_mode) {
  switch (static_cast<SurveyMode>(raw_mode)) {
    case SurveyMode::Car:
    case SurveyMode::Suv:
    case SurveyMode::Van:
    case SurveyMode::PickupTruck:
    case SurveyMode::Motorcycle:
      return Alternative::PersonalVehicle;
    case SurveyMode::Walk:
      return Alternative::Walk;
    case SurveyMode::PublicBus:
    case SurveyMode::CityToCityBus:
    case SurveyMode::Amtrak:
    case SurveyMode::Subway:
      return Alternative::PublicTransport;
    case SurveyMode::Bicycle:
    case SurveyMode::GolfCart:
    case SurveyMode::RecreationalVehicle:
    case SurveyMode::SchoolBus:
    case SurveyMode::Paratransit:
    case SurveyMode::PrivateBus:
    case SurveyMode::Taxi:
    case SurveyMode::RentalCar:
    case SurveyMode::Airplane:
    case SurveyMode::Boat:
    case SurveyMode::SomethingElse:
      return Alternative::OtherMode;
  }
  throw InputError(fmt::format("unrecognized survey mode code {}", raw_mode));
}

Season season_of_month(unsigned month) {
  switch (month) {
    case 12: case 1: case 2: return Season::Winter;
    case 3: case 4: case 5: return Season::Spring;
    case 6: case 7: case 8: return Season::Summer;
    case 9: case 10: case 11: return Season::Fall;
    default: throw std::invalid_argument(fmt::format("month {} outside 1..12", month));
  }
}

ChoiceObservation recode(const RawTripRecord& r) {
  const auto age = age_bin(r.age);
  if (!age) {
    throw std::invalid_argument(
        fmt::format("trip '{}' of person '{}' is not an adult record", r.trip_id, r.person_id));
  }

  ChoiceObservation obs;
  obs.person_id = r.household_id.empty() ? r.person_id : r.household_id + "-" + r.person_id;
  obs.obs_id = obs.person_id + "/" + r.trip_id;
  obs.chosen = collapse_mode(r.raw_mode);
  obs.weight = r.weight;
  for (std::size_t a = 0; a < kNumAlternatives; ++a) {
    obs.available[a] = r.availability[a].value_or(true);
  }
  obs.endpoints = {r.origin, r.destination, r.start_time, r.end_time};

  auto& cov = obs.covariates;
  static constexpr std::array<std::string_view, 4> kAge = {"age_18_24", "age_25_44",
                                                           "age_45_64", "age_over_65"};
  emit_family(cov, kAge, age);
  static constexpr std::array<std::string_view, 2> kGender = {"male", "female"};
  emit_family(cov, kGender, ordinal(r.gender));
  static constexpr std::array<std::string_view, 2> kRace = {"race_white", "race_nonwhite"};
  emit_family(cov, kRace, ordinal(r.race));
  static constexpr std::array<std::string_view, 2> kEdu = {"edu_less_than_bachelor",
                                                           "edu_bachelor_or_higher"};
  emit_family(cov, kEdu, ordinal(r.education));
  static constexpr std::array<std::string_view, 5> kIncome = {
      "income_lt_50k", "income_50k_75k", "income_75k_100k", "income_100k_200k",
      "income_200k_plus"};
  emit_family(cov, kIncome, ordinal(r.income));
  static constexpr std::array<std::string_view, 2> kPurpose = {"purpose_work",
                                                               "purpose_nonwork"};
  emit_family(cov, kPurpose, ordinal(r.purpose));
  static constexpr std::array<std::string_view, 2> kOriginArea = {"origin_urban",
                                                                  "origin_rural"};
  emit_family(cov, kOriginArea, binary(r.origin_urban));
  static constexpr std::array<std::string_view, 2> kDestArea = {"dest_urban", "dest_rural"};
  emit_family(cov, kDestArea, binary(r.dest_urban));
  static constexpr std::array<std::string_view, 2> kDay = {"weekday", "weekend"};
  emit_family(cov, kDay, binary(r.weekday));
  static constexpr std::array<std::string_view, 2> kCategory = {"home_based",
                                                                "non_home_based"};
  emit_family(cov, kCategory, binary(r.home_based));

  cov["worker"] = indicator(r.worker);
  cov["driver"] = indicator(r.driver);
  cov["hispanic"] = indicator(r.hispanic);
  cov["health_poor"] = indicator(r.health_poor);
  cov["born_in_us"] = indicator(r.born_in_us);
  cov["works_from_home"] = indicator(r.works_from_home);
  cov["origin_nyc"] = indicator(r.origin_nyc);
  cov["dest_nyc"] = indicator(r.dest_nyc);

  std::optional<double> loop;
  if (r.origin && r.destination) {
    loop = (std::abs(r.origin->lat - r.destination->lat) <= kLoopTolerance &&
            std::abs(r.origin->lon - r.destination->lon) <= kLoopTolerance)
               ? 1.0
               : 0.0;
  }
  cov["loop_trip"] = loop;

  static constexpr std::array<std::string_view, 4> kTimeOfDay = {"tod_0700_0959",
                                                                 "tod_1000_1559",
                                                                 "tod_1600_1859",
                                                                 "tod_1900_0659"};
  std::optional<std::size_t> tod;
  if (r.start_time) tod = time_of_day_bin(minute_of_day(*r.start_time));
  emit_family(cov, kTimeOfDay, tod);

  static constexpr std::array<std::string_view, 4> kSeason = {"season_winter", "season_spring",
                                                              "season_summer", "season_fall"};
  std::optional<unsigned> month = r.travel_month;
  if (!month && r.start_time) month = month_of(*r.start_time);
  std::optional<std::size_t> season;
  if (month) season = static_cast<std::size_t>(season_of_month(*month));
  emit_family(cov, kSeason, season);

  for (auto device : kStandardDevices) {
    std::optional<double> flag;
    if (r.medical_devices) flag = r.medical_devices->count(std::string(device)) ? 1.0 : 0.0;
    cov["device_" + std::string(device)] = flag;
  }
  if (r.medical_devices) {
    for (const auto& device : *r.medical_devices) cov["device_" + device] = 1.0;
  }

  cov["log_trip_length"] = positive_log(r.trip_miles);
  cov["log_trip_duration"] = positive_log(r.trip_minutes);
  obs.incomplete = !cov["log_trip_length"] || !cov["log_trip_duration"];

  for (const auto& [name, value] : r.passthrough) cov[name] = value;
  return obs;
}

std::vector<ChoiceObservation> recode_all(std::span<const RawTripRecord> records,
                                          unsigned workers) {
  std::vector<ChoiceObservation> out(records.size());
  parallel_blocks(records.size(), 1024, workers,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) out[i] = recode(records[i]);
                  });
  return out;
}

std::span<const std::string_view> required_trip_columns() noexcept {
  return kRequiredColumns;
}

std::string availability_column(Alternative a) {
  switch (a) {
    case Alternative::PersonalVehicle: return "avail_personal_vehicle";
    case Alternative::PublicTransport: return "avail_public_transport";
    case Alternative::Walk: return "avail_walk";
    case Alternative::OtherMode: return "avail_other_mode";
  }
  return {};
}

std::vector<RawTripRecord> read_trips_csv(std::istream& in) {
  const csv::Table table = csv::read(in);
  if (table.header.empty()) return {};
  for (auto column : required_trip_columns()) table.require_column(column);
  std::vector<RawTripRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    records.push_back(parse_trip_row(table, table.rows[i], i + 1));
  }
  return records;
}

namespace {

std::string bool_field(const std::optional<bool>& b) {
  return b ? (*b ? "1" : "0") : "";
}

template <class E>
std::string enum_field(const std::optional<E>& e, std::span<const std::string_view> names) {
  return e ? std::string(names[static_cast<std::size_t>(*e)]) : "";
}

}  // namespace

void write_trips_csv(std::ostream& out, std::span<const RawTripRecord> records) {
  std::set<std::string> passthrough;
  for (const auto& r : records) {
    for (const auto& [name, _] : r.passthrough) passthrough.insert(name);
  }
  std::vector<std::string> header(kRequiredColumns.begin(), kRequiredColumns.end());
  header.insert(header.end(), {"household_id", "medical_devices", "weight"});
  for (Alternative a : kAllAlternatives) header.push_back(availability_column(a));
  for (const auto& name : passthrough) header.push_back(std::string(kPassthroughPrefix) + name);
  csv::write_row(out, header);

  static constexpr std::array<std::string_view, 2> kGenderNames = {"male", "female"};
  static constexpr std::array<std::string_view, 2> kRaceNames = {"white", "nonwhite"};
  static constexpr std::array<std::string_view, 2> kEduNames = {"less_than_bachelor",
                                                                "bachelor_or_higher"};
  static constexpr std::array<std::string_view, 5> kIncomeNames = {
      "lt_50k", "50k_75k", "75k_100k", "100k_200k", "200k_plus"};
  static constexpr std::array<std::string_view, 2> kPurposeNames = {"work", "nonwork"};
  const auto num = [](const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string();
  };

  for (const auto& r : records) {
    std::string devices;
    if (r.medical_devices) {
      for (const auto& d : *r.medical_devices) devices += (devices.empty() ? "" : ";") + d;
    }
    std::vector<std::string> f = {
        r.person_id,
        r.trip_id,
        std::to_string(r.age),
        enum_field(r.gender, kGenderNames),
        bool_field(r.worker),
        bool_field(r.driver),
        enum_field(r.race, kRaceNames),
        bool_field(r.hispanic),
        enum_field(r.education, kEduNames),
        enum_field(r.income, kIncomeNames),
        r.disability ? "1" : "0",
        bool_field(r.health_poor),
        bool_field(r.born_in_us),
        bool_field(r.works_from_home),
        std::to_string(r.raw_mode),
        num(r.trip_miles),
        num(r.trip_minutes),
        r.origin ? csv::format_double(r.origin->lat) : "",
        r.origin ? csv::format_double(r.origin->lon) : "",
        r.destination ? csv::format_double(r.destination->lat) : "",
        r.destination ? csv::format_double(r.destination->lon) : "",
        r.start_time ? format_timestamp(*r.start_time) : "",
        r.end_time ? format_timestamp(*r.end_time) : "",
        bool_field(r.origin_urban),
        bool_field(r.dest_urban),
        bool_field(r.origin_nyc),
        bool_field(r.dest_nyc),
        enum_field(r.purpose, kPurposeNames),
        bool_field(r.home_based),
        r.travel_month ? std::to_string(*r.travel_month) : "",
        bool_field(r.weekday),
        r.household_id,
        devices,
        csv::format_double(r.weight),
    };
    for (const auto& a : r.availability) f.push_back(bool_field(a));
    for (const auto& name : passthrough) {
      auto it = r.passthrough.find(name);
      f.push_back(it == r.passthrough.end() ? "" : num(it->second));
    }
    csv::write_row(out, f);
  }
}

namespace {

constexpr std::array<std::string_view, 11> kObservationMeta = {
    "obs_id",   "person_id", "chosen",   "weight",     "incomplete", "origin_lat",
    "origin_lon", "dest_lat", "dest_lon", "start_time", "end_time"};

std::string optional_field(const std::optional<double>& v) {
  return v ? csv::format_double(*v) : std::string();
}

}  // namespace

void write_observations_csv(std::ostream& out, std::span<const ChoiceObservation> observations) {
  std::set<std::string, std::less<>> covariate_names;
  for (const auto& obs : observations) {
    for (const auto& [name, _] : obs.covariates) covariate_names.insert(name);
  }

  std::vector<std::string> header;
  for (auto m : kObservationMeta) header.emplace_back(m);
  for (Alternative a : kAllAlternatives) header.push_back(availability_column(a));
  header.insert(header.end(), covariate_names.begin(), covariate_names.end());
  csv::write_row(out, header);

  std::vector<std::string> fields;
  for (const auto& obs : observations) {
    fields.clear();
    const auto& ep = obs.endpoints;
    fields.push_back(obs.obs_id);
    fields.push_back(obs.person_id);
    fields.emplace_back(to_string(obs.chosen));
    fields.push_back(csv::format_double(obs.weight));
    fields.emplace_back(obs.incomplete ? "1" : "0");
    fields.push_back(ep.origin ? csv::format_double(ep.origin->lat) : "");
    fields.push_back(ep.origin ? csv::format_double(ep.origin->lon) : "");
    fields.push_back(ep.destination ? csv::format_double(ep.destination->lat) : "");
    fields.push_back(ep.destination ? csv::format_double(ep.destination->lon) : "");
    fields.push_back(ep.start ? format_timestamp(*ep.start) : "");
    fields.push_back(ep.end ? format_timestamp(*ep.end) : "");
    for (Alternative a : kAllAlternatives) fields.emplace_back(obs.available[index_of(a)] ? "1" : "0");
    for (const auto& name : covariate_names) fields.push_back(optional_field(obs.covariate(name)));
    csv::write_row(out, fields);
  }
}

std::vector<ChoiceObservation> read_observations_csv(std::istream& in) {
  const csv::Table table = csv::read(in);
  if (table.header.empty()) return {};
  for (auto column : {"obs_id", "person_id", "chosen"}) table.require_column(column);

  std::set<std::string, std::less<>> meta;
  for (auto m : kObservationMeta) meta.emplace(m);
  for (Alternative a : kAllAlternatives) meta.insert(availability_column(a));
  std::vector<std::size_t> covariate_columns;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (!meta.count(table.header[c]) && !table.header[c].empty()) covariate_columns.push_back(c);
  }

  std::vector<ChoiceObservation> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const FieldReader f{table, table.rows[i], i + 1};
    ChoiceObservation obs;
    obs.obs_id = std::string(f.raw("obs_id"));
    obs.person_id = std::string(f.raw("person_id"));
    if (obs.obs_id.empty()) f.fail("obs_id", "value required");
    if (obs.person_id.empty()) obs.person_id = obs.obs_id;
    const auto chosen = parse_alternative(f.raw("chosen"));
    if (!chosen) f.fail("chosen", "unknown alternative");
    obs.chosen = *chosen;
    obs.weight = f.real("weight").value_or(1.0);
    obs.incomplete = f.boolean("incomplete").value_or(false);
    for (Alternative a : kAllAlternatives) {
      obs.available[index_of(a)] = f.boolean(availability_column(a)).value_or(true);
    }
    obs.endpoints.origin = f.point("origin_lat", "origin_lon");
    obs.endpoints.destination = f.point("dest_lat", "dest_lon");
    obs.endpoints.start = f.time("start_time");
    obs.endpoints.end = f.time("end_time");
    for (std::size_t c : covariate_columns) obs.covariates[table.header[c]] = f.real(table.header[c]);
    try {
      validate(obs);
    } catch (const InputError& e) {
      throw InputError(e.what(), i + 1);
    }
    out.push_back(std::move(obs));
  }
  return out;
}

}  // namespace modechoice
