#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "modechoice/alternative.hpp"
#include "modechoice/geo.hpp"
#include "modechoice/timestamp.hpp"

namespace modechoice {

// ---------------------------------------------------------------------------
// Raw survey records
// ---------------------------------------------------------------------------

/// Trip-mode codes of the household travel survey (2017 NHTS TRPTRANS list).
enum class SurveyMode : int {
  Walk = 1,
  Bicycle = 2,
  Car = 3,
  Suv = 4,
  Van = 5,
  PickupTruck = 6,
  GolfCart = 7,
  Motorcycle = 8,
  RecreationalVehicle = 9,
  SchoolBus = 10,
  PublicBus = 11,
  Paratransit = 12,
  PrivateBus = 13,
  CityToCityBus = 14,
  Amtrak = 15,
  Subway = 16,
  Taxi = 17,
  RentalCar = 18,
  Airplane = 19,
  Boat = 20,
  SomethingElse = 97,
};

/// Every recognized survey mode code, ascending.
std::span<const SurveyMode> all_survey_modes() noexcept;

enum class Gender { Male, Female };
enum class Race { White, NonWhite };
enum class Education { LessThanBachelor, BachelorOrHigher };
enum class IncomeBand { Under50k, From50kTo75k, From75kTo100k, From100kTo200k, Over200k };
enum class TripPurpose { Work, NonWork };

/// One surveyed trip. Optional fields are blank in the input; a blank value
/// propagates to a missing covariate after recoding.
struct RawTripRecord {
  std::string person_id;
  std::string household_id;
  std::string trip_id;
  int age = 0;
  std::optional<Gender> gender;
  std::optional<bool> worker;
  std::optional<bool> driver;
  std::optional<Race> race;
  std::optional<bool> hispanic;
  std::optional<Education> education;
  std::optional<IncomeBand> income;
  bool disability = false;
  /// Absent when the table has no medical_devices column.
  std::optional<std::set<std::string>> medical_devices;
  std::optional<bool> health_poor;
  std::optional<bool> born_in_us;
  std::optional<bool> works_from_home;
  int raw_mode = 0;
  std::optional<double> trip_miles;
  std::optional<double> trip_minutes;
  std::optional<GeoPoint> origin;
  std::optional<GeoPoint> destination;
  std::optional<LocalTime> start_time;
  std::optional<LocalTime> end_time;
  std::optional<bool> origin_urban;
  std::optional<bool> dest_urban;
  std::optional<bool> origin_nyc;
  std::optional<bool> dest_nyc;
  std::optional<TripPurpose> purpose;
  std::optional<bool> home_based;
  std::optional<unsigned> travel_month;
  std::optional<bool> weekday;
  double weight = 1.0;
  std::array<std::optional<bool>, kNumAlternatives> availability{};
  std::map<std::string, std::optional<double>> passthrough;
};

// ---------------------------------------------------------------------------
// Model-ready observations
// ---------------------------------------------------------------------------

using CovariateMap = std::map<std::string, std::optional<double>, std::less<>>;

struct TripEndpoints {
  std::optional<GeoPoint> origin;
  std::optional<GeoPoint> destination;
  std::optional<LocalTime> start;
  std::optional<LocalTime> end;
};

struct ChoiceObservation {
  std::string obs_id;
  std::string person_id;
  Alternative chosen = Alternative::PersonalVehicle;
  AvailabilityMask available = kAllAvailable;
  double weight = 1.0;
  CovariateMap covariates;
  TripEndpoints endpoints;
  /// Set when a mandatory measurement (trip length or duration) is unusable;
  /// such rows never enter estimation.
  bool incomplete = false;

  /// Missing when absent from the map or recorded as blank.
  std::optional<double> covariate(std::string_view name) const;
};

/// Throws InputError unless the chosen alternative is available and at least
/// two alternatives are available.
void validate(const ChoiceObservation& obs);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

inline constexpr int kAdultAge = 18;

/// Keeps adults (age >= 18) reporting a travel-limiting disability.
std::vector<RawTripRecord> filter_tld_adults(std::span<const RawTripRecord> records);

/// Maps a survey mode code onto the four-way choice set. Throws InputError
/// naming the code when it is not recognized.
Alternative collapse_mode(int raw_mode);

/// Builds indicator families, log transforms, and endpoint context for one
/// record. Requires an adult record (throws std::invalid_argument otherwise).
ChoiceObservation recode(const RawTripRecord& record);

/// Order-preserving recode of many records.
std::vector<ChoiceObservation> recode_all(std::span<const RawTripRecord> records,
                                          unsigned workers = 1);

enum class Season { Winter, Spring, Summer, Fall };
Season season_of_month(unsigned month);

/// Two points closer than this (in both coordinates) mark a loop trip.
inline constexpr double kLoopTolerance = 1e-6;

// ---------------------------------------------------------------------------
// CSV I/O
// ---------------------------------------------------------------------------

/// Columns every trip table must carry. Optional columns: household_id,
/// medical_devices, weight, avail_<alternative>, and cov_<name> pass-through
/// covariates. Anything else is ignored.
std::span<const std::string_view> required_trip_columns() noexcept;

std::vector<RawTripRecord> read_trips_csv(std::istream& in);

/// Writes records using the column contract read_trips_csv() accepts.
void write_trips_csv(std::ostream& out, std::span<const RawTripRecord> records);

void write_observations_csv(std::ostream& out, std::span<const ChoiceObservation> observations);

std::vector<ChoiceObservation> read_observations_csv(std::istream& in);

/// Column name used for an alternative's availability flag, e.g. "avail_walk".
std::string availability_column(Alternative a);

}  // namespace modechoice

