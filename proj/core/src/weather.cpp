#include "modechoice/weather.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "modechoice/csv.hpp"
#include "modechoice/errors.hpp"
#include "modechoice/parallel.hpp"

namespace modechoice {
namespace {

constexpr std::array<std::string_view, 5> kVariables = {
    "temperature", "precipitation", "humidity", "visibility", "wind_speed"};

std::array<std::optional<double>, 5> as_array(const WeatherValues& v) {
  return {v.temperature, v.precipitation, v.humidity, v.visibility, v.wind_speed};
}

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

const WeatherRecord& nearest_in_time(const WeatherIndex::Station& station, LocalTime when) {
  const auto& recs = station.records;
  auto it = std::lower_bound(recs.begin(), recs.end(), when,
                             [](const WeatherRecord& r, LocalTime t) { return r.timestamp < t; });
  if (it == recs.end()) return recs.back();
  if (it == recs.begin()) return *it;
  const auto prev = std::prev(it);
  // Equal gaps resolve to the earlier record.
  return (it->timestamp - when) < (when - prev->timestamp) ? *it : *prev;
}

std::optional<double> parse_value(const csv::Table& table, const std::vector<std::string>& row,
                                  std::size_t row_number, std::string_view column) {
  const auto idx = table.require_column(column);
  const auto s = csv::trim(row[idx]);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw InputError(fmt::format("column '{}': not a finite number (value '{}')", column, s),
                     row_number);
  }
  return v;
}

void check_ranges(const WeatherValues& v, std::size_t row) {
  if (v.humidity && (*v.humidity < 0.0 || *v.humidity > 100.0)) {
    throw InputError("humidity outside [0, 100]", row);
  }
  if (v.visibility && *v.visibility < 0.0) throw InputError("negative visibility", row);
  if (v.wind_speed && *v.wind_speed < 0.0) throw InputError("negative wind_speed", row);
  if (v.precipitation && *v.precipitation < 0.0) throw InputError("negative precipitation", row);
}

}  // namespace

double haversine_miles(GeoPoint a, GeoPoint b) {
  if (!is_valid(a) || !is_valid(b)) {
    throw std::invalid_argument(fmt::format("coordinate out of range: ({}, {}) / ({}, {})", a.lat,
                                            a.lon, b.lat, b.lon));
  }
  const double dlat = radians(b.lat - a.lat);
  const double dlon = radians(b.lon - a.lon);
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = s1 * s1 + std::cos(radians(a.lat)) * std::cos(radians(b.lat)) * s2 * s2;
  return 2.0 * kEarthRadiusMiles * std::asin(std::min(1.0, std::sqrt(h)));
}

WeatherIndex::WeatherIndex(std::vector<WeatherRecord> records) {
  std::map<std::string, Station> by_id;
  for (auto& rec : records) {
    auto [it, inserted] = by_id.try_emplace(rec.station_id);
    Station& st = it->second;
    if (inserted) {
      st.id = rec.station_id;
      st.location = rec.location;
    } else if (std::abs(st.location.lat - rec.location.lat) > 1e-6 ||
               std::abs(st.location.lon - rec.location.lon) > 1e-6) {
      throw InputError(fmt::format("station '{}' reports inconsistent coordinates", st.id));
    }
    st.records.push_back(std::move(rec));
  }
  stations_.reserve(by_id.size());
  for (auto& [_, st] : by_id) {
    std::stable_sort(st.records.begin(), st.records.end(),
                     [](const WeatherRecord& a, const WeatherRecord& b) {
                       return a.timestamp < b.timestamp;
                     });
    stations_.push_back(std::move(st));
  }
}

WeatherAtEndpoint match_weather(Endpoint endpoint, LocalTime when, GeoPoint where,
                                const WeatherIndex& index, const MatchOptions& options) {
  if (index.empty()) throw std::invalid_argument("weather index has no stations");

  const WeatherIndex::Station* best = nullptr;
  double best_distance = 0.0;
  for (const auto& st : index.stations()) {
    const double d = haversine_miles(where, st.location);
    // Stations iterate in ascending id, so strict '<' keeps the smaller id on ties.
    if (!best || d < best_distance) {
      best = &st;
      best_distance = d;
    }
  }

  WeatherAtEndpoint out;
  out.endpoint = endpoint;
  out.matched_station = best->id;
  const WeatherRecord& rec = nearest_in_time(*best, when);
  out.time_gap_minutes = minutes_between(when, rec.timestamp);
  if (*out.time_gap_minutes <= options.max_gap_minutes) {
    out.missing = false;
    out.values = rec.values;
  }
  return out;
}

std::vector<std::string> weather_covariate_names() {
  std::vector<std::string> names;
  for (auto prefix : {"origin_", "dest_"}) {
    for (auto var : kVariables) names.push_back(prefix + std::string(var));
  }
  return names;
}

std::vector<ChoiceObservation> fuse(std::vector<ChoiceObservation> observations,
                                    const WeatherIndex& index, const MatchOptions& options,
                                    unsigned workers) {
  if (index.empty()) throw std::invalid_argument("weather index has no stations");
  const auto names = weather_covariate_names();
  for (const auto& obs : observations) {
    for (const auto& name : names) {
      if (obs.covariates.count(name)) {
        throw InputError(fmt::format("observation '{}' already carries covariate '{}'",
                                     obs.obs_id, name));
      }
    }
  }

  parallel_blocks(observations.size(), 512, workers,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto& obs = observations[i];
      const auto& ep = obs.endpoints;
      const auto attach = [&](Endpoint which, const std::optional<GeoPoint>& place,
                              const std::optional<LocalTime>& time, std::size_t offset) {
        WeatherAtEndpoint w;
        if (place && time) w = match_weather(which, *time, *place, index, options);
        const auto values = as_array(w.values);
        for (std::size_t k = 0; k < values.size(); ++k) {
          obs.covariates[names[offset + k]] = w.missing ? std::nullopt : values[k];
        }
      };
      attach(Endpoint::Origin, ep.origin, ep.start, 0);
      attach(Endpoint::Destination, ep.destination, ep.end, kVariables.size());
    }
  });
  return observations;
}

std::vector<WeatherRecord> read_weather_csv(std::istream& in) {
  const csv::Table table = csv::read(in);
  if (table.header.empty()) return {};
  const auto id_col = table.require_column("station_id");
  const auto ts_col = table.require_column("timestamp");
  for (auto c : {"lat", "lon"}) table.require_column(c);
  for (auto v : kVariables) table.require_column(v);

  std::vector<WeatherRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::size_t n = i + 1;
    WeatherRecord rec;
    rec.station_id = std::string(csv::trim(row[id_col]));
    if (rec.station_id.empty()) throw InputError("column 'station_id': value required", n);
    const auto lat = parse_value(table, row, n, "lat");
    const auto lon = parse_value(table, row, n, "lon");
    if (!lat || !lon) throw InputError("station coordinates required", n);
    rec.location = {*lat, *lon};
    if (!is_valid(rec.location)) throw InputError("station coordinates out of range", n);
    try {
      rec.timestamp = parse_timestamp(csv::trim(row[ts_col]));
    } catch (const std::invalid_argument& e) {
      throw InputError(fmt::format("column 'timestamp': {}", e.what()), n);
    }
    rec.values.temperature = parse_value(table, row, n, "temperature");
    rec.values.precipitation = parse_value(table, row, n, "precipitation");
    rec.values.humidity = parse_value(table, row, n, "humidity");
    rec.values.visibility = parse_value(table, row, n, "visibility");
    rec.values.wind_speed = parse_value(table, row, n, "wind_speed");
    check_ranges(rec.values, n);
    out.push_back(std::move(rec));
  }
  return out;
}

void write_weather_csv(std::ostream& out, std::span<const WeatherRecord> records) {
  std::vector<std::string> header = {"station_id", "lat", "lon", "timestamp"};
  for (auto v : kVariables) header.emplace_back(v);
  csv::write_row(out, header);
  for (const auto& r : records) {
    std::vector<std::string> fields = {r.station_id, csv::format_double(r.location.lat),
                                       csv::format_double(r.location.lon),
                                       format_timestamp(r.timestamp)};
    for (const auto& v : as_array(r.values)) fields.push_back(v ? csv::format_double(*v) : "");
    csv::write_row(out, fields);
  }
}

}  // namespace modechoice
