#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modechoice/choice_data.hpp"
#include "modechoice/geo.hpp"
#include "modechoice/timestamp.hpp"

namespace modechoice {

inline constexpr double kEarthRadiusMiles = 3958.8;

/// Great-circle distance. Throws std::invalid_argument for coordinates outside
/// [-90, 90] x [-180, 180].
double haversine_miles(GeoPoint a, GeoPoint b);

/// Station readings in survey units: degrees F, inches, percent, miles, mph.
struct WeatherValues {
  std::optional<double> temperature;
  std::optional<double> precipitation;
  std::optional<double> humidity;
  std::optional<double> visibility;
  std::optional<double> wind_speed;
};

struct WeatherRecord {
  std::string station_id;
  GeoPoint location;
  LocalTime timestamp;
  WeatherValues values;
};

enum class Endpoint { Origin, Destination };

struct WeatherAtEndpoint {
  Endpoint endpoint = Endpoint::Origin;
  /// Empty when no station could be consulted (endpoint lacks place or time).
  std::string matched_station;
  /// |endpoint time - record time| of the nearest record at the matched station.
  std::optional<double> time_gap_minutes;
  /// True when the endpoint carries no usable weather; values are then empty.
  bool missing = true;
  WeatherValues values;
};

/// Immutable station-hourly archive. Stations are held in ascending id order
/// and each station's records in ascending time, so lookups never depend on
/// the order records were supplied in.
class WeatherIndex {
 public:
  struct Station {
    std::string id;
    GeoPoint location;
    std::vector<WeatherRecord> records;
  };

  /// Throws InputError when a station reports inconsistent coordinates.
  explicit WeatherIndex(std::vector<WeatherRecord> records);

  std::span<const Station> stations() const noexcept { return stations_; }
  bool empty() const noexcept { return stations_.empty(); }

 private:
  std::vector<Station> stations_;
};

struct MatchOptions {
  double max_gap_minutes = 180.0;
};

/// Nearest station first (ties: smaller station id), then that station's
/// nearest record in time (ties: earlier record). A gap beyond
/// max_gap_minutes marks the endpoint weather-missing. Throws
/// std::invalid_argument for an empty index.
WeatherAtEndpoint match_weather(Endpoint endpoint, LocalTime when, GeoPoint where,
                                const WeatherIndex& index, const MatchOptions& options = {});

/// Names of the ten covariates fuse() adds, origin block first.
std::vector<std::string> weather_covariate_names();

/// Adds origin_* and dest_* weather covariates to every observation. Rows and
/// existing covariates are untouched; observations lacking endpoint place or
/// time receive missing values. Throws std::invalid_argument for an empty
/// index and InputError if a weather covariate already exists.
std::vector<ChoiceObservation> fuse(std::vector<ChoiceObservation> observations,
                                    const WeatherIndex& index,
                                    const MatchOptions& options = {}, unsigned workers = 1);

/// Columns: station_id, lat, lon, timestamp, temperature, precipitation,
/// humidity, visibility, wind_speed. Blank values are missing.
std::vector<WeatherRecord> read_weather_csv(std::istream& in);

void write_weather_csv(std::ostream& out, std::span<const WeatherRecord> records);

}  // namespace modechoice
