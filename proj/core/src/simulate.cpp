#include "modechoice/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "modechoice/errors.hpp"
#include "modechoice/likelihood.hpp"

namespace modechoice {
namespace {

using Rng = std::mt19937_64;

double draw(const CovariateDistribution& d, Rng& rng) {
  switch (d.kind) {
    case CovariateDistribution::Kind::Bernoulli:
      return std::bernoulli_distribution(d.a)(rng) ? 1.0 : 0.0;
    case CovariateDistribution::Kind::Normal:
      return std::normal_distribution<double>(d.a, d.b)(rng);
    case CovariateDistribution::Kind::Uniform:
      return std::uniform_real_distribution<double>(d.a, d.b)(rng);
  }
  return 0.0;
}

Alternative sample_choice(const Probabilities& p, Rng& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cum = 0.0;
  for (std::size_t a = 0; a < kNumAlternatives; ++a) {
    cum += p[a];
    if (u < cum) return alternative_at(a);
  }
  for (std::size_t a = kNumAlternatives; a-- > 0;) {
    if (p[a] > 0.0) return alternative_at(a);
  }
  return Alternative::PersonalVehicle;
}

// Per-person coefficient draws: the random part of each random term.
std::vector<double> person_draws(const ModelSpecification& spec, Rng& rng) {
  std::vector<double> z(spec.n_random());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : z) v = normal(rng);
  return z;
}

}  // namespace

std::vector<ChoiceObservation> simulate_choices(const ChoiceSimulation& sim) {
  const auto& spec = sim.spec;
  if (sim.true_parameters.size() != spec.n_parameters()) {
    throw std::invalid_argument(fmt::format("simulation: {} true parameters for {} slots",
                                            sim.true_parameters.size(), spec.n_parameters()));
  }
  if (sim.trips_per_person == 0) throw std::invalid_argument("simulation: trips_per_person is 0");
  const UtilityModel model(spec, sim.true_parameters);
  const auto covariates = spec.covariates();

  Rng rng(sim.seed);
  std::vector<ChoiceObservation> out;
  out.reserve(sim.n_observations);
  std::vector<double> z;
  for (std::size_t i = 0; i < sim.n_observations; ++i) {
    const std::size_t person = i / sim.trips_per_person;
    if (i % sim.trips_per_person == 0) z = person_draws(spec, rng);
    ChoiceObservation obs;
    obs.person_id = fmt::format("p{:06d}", person);
    obs.obs_id = fmt::format("{}/{}", obs.person_id, i % sim.trips_per_person + 1);
    for (const auto& name : covariates) {
      const auto it = sim.covariates.find(name);
      obs.covariates[name] = draw(it == sim.covariates.end() ? CovariateDistribution{} : it->second, rng);
    }
    const auto x = covariate_row(spec, obs);
    const auto p = mnl_probabilities(model.utilities(x, obs.available, z), obs.available);
    obs.chosen = sample_choice(p, rng);
    out.push_back(std::move(obs));
  }
  return out;
}

ChoiceSimulation simulation_from_json(const nlohmann::json& doc, std::uint64_t seed) {
  if (!doc.is_object()) throw SpecError("simulation document must be a JSON object");
  ChoiceSimulation sim;
  sim.seed = seed;
  if (!doc.contains("specification")) throw SpecError("simulation: missing 'specification'");
  sim.spec = ModelSpecification::from_json(doc.at("specification"));
  try {
    sim.n_observations = doc.value("n_observations", sim.n_observations);
    sim.trips_per_person = doc.value("trips_per_person", sim.trips_per_person);
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(fmt::format("simulation: {}", e.what()));
  }

  const auto params = doc.find("parameters");
  if (params == doc.end() || !params->is_object()) {
    throw SpecError("simulation: 'parameters' must map parameter labels to values");
  }
  for (const auto& slot : sim.spec.slots()) {
    const auto v = params->find(slot.label);
    if (v == params->end() || !v->is_number()) {
      throw SpecError(fmt::format("simulation: no numeric value for parameter '{}'", slot.label));
    }
    const double value = v->get<double>();
    if (slot.role == ParameterRole::StdDev && value < 0.0) {
      throw SpecError(fmt::format("simulation: parameter '{}' must be >= 0", slot.label));
    }
    sim.true_parameters.push_back(value);
  }

  if (auto cov = doc.find("covariates"); cov != doc.end()) {
    if (!cov->is_object()) throw SpecError("simulation: 'covariates' must be an object");
    for (const auto& [name, def] : cov->items()) {
      CovariateDistribution d;
      const std::string dist = def.value("dist", std::string("bernoulli"));
      if (dist == "bernoulli") {
        d = {CovariateDistribution::Kind::Bernoulli, def.value("p", 0.5), 0.0};
      } else if (dist == "normal") {
        d = {CovariateDistribution::Kind::Normal, def.value("mean", 0.0), def.value("sd", 1.0)};
      } else if (dist == "uniform") {
        d = {CovariateDistribution::Kind::Uniform, def.value("low", 0.0), def.value("high", 1.0)};
      } else {
        throw SpecError(fmt::format("simulation: unknown distribution '{}' for '{}'", dist, name));
      }
      sim.covariates[name] = d;
    }
  }
  return sim;
}

// ---------------------------------------------------------------------------
// Survey fixture
// ---------------------------------------------------------------------------

ModelSpecification survey_specification() {
  using A = Alternative;
  const auto fixed = [](std::string name, std::string cov, A alt) {
    return Term{std::move(name), std::move(cov), alt, TermKind::Fixed};
  };
  return ModelSpecification({
      fixed("PV: Constant", std::string(kConstant), A::PersonalVehicle),
      fixed("PV: Age over 65", "age_over_65", A::PersonalVehicle),
      fixed("PV: Race white", "race_white", A::PersonalVehicle),
      fixed("PV: Driver", "driver", A::PersonalVehicle),
      fixed("PV: Home-based", "home_based", A::PersonalVehicle),
      fixed("PV: Log(Trip duration)", "log_trip_duration", A::PersonalVehicle),
      fixed("PV: Log(Trip length)", "log_trip_length", A::PersonalVehicle),
      fixed("PT: Constant", std::string(kConstant), A::PublicTransport),
      fixed("PT: Income under $50,000", "income_lt_50k", A::PublicTransport),
      fixed("PT: Destination urban", "dest_urban", A::PublicTransport),
      fixed("PT: Origin wind speed", "origin_wind_speed", A::PublicTransport),
      fixed("Walk: Constant", std::string(kConstant), A::Walk),
      fixed("Walk: Log(Trip length)", "log_trip_length", A::Walk),
      fixed("Walk: Origin temperature", "origin_temperature", A::Walk),
      Term{"Other: Trip purpose non-work", "purpose_nonwork", A::OtherMode, TermKind::RandomNormal},
      fixed("Other: Manual wheelchair", "device_manual_wheelchair", A::OtherMode),
  });
}

std::vector<double> survey_truth() {
  return {1.5,  0.9, 0.8, 2.5, -0.6, -1.0, 0.8,   // personal vehicle
          -1.2, 0.9, 1.0, 0.04,                  // public transport
          0.8,  -1.6, 0.015,                     // walk
          -1.5, 1.5,                             // other: non-work mean, sd
          2.0};
}

SurveyFixture simulate_survey(std::size_t n_persons, std::uint64_t seed) {
  struct StationSite {
    const char* id;
    GeoPoint at;
    bool nyc;
    bool urban;
  };
  static constexpr std::array<StationSite, 8> kSites = {{
      {"KALB", {42.7483, -73.8017}, false, true},
      {"KBGM", {42.2087, -75.9797}, false, false},
      {"KBUF", {42.9405, -78.7322}, false, true},
      {"KISP", {40.7952, -73.1002}, false, true},
      {"KJFK", {40.6413, -73.7781}, true, true},
      {"KLGA", {40.7769, -73.8740}, true, true},
      {"KROC", {43.1189, -77.6724}, false, false},
      {"KSYR", {43.1112, -76.1063}, false, false},
  }};

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto bern = [&](double p) { return unit(rng) < p; };

  SurveyFixture fx;
  using namespace std::chrono;
  // Survey days: the 3rd and 17th of every month of 2017.
  std::vector<local_days> days;
  for (unsigned m = 1; m <= 12; ++m) {
    for (unsigned d : {3u, 17u}) days.emplace_back(year{2017} / month{m} / day{d});
  }
  for (const auto& site : kSites) {
    for (std::size_t di = 0; di < days.size(); ++di) {
      const double season = std::cos(2.0 * 3.141592653589793 * (static_cast<double>(di) / 24.0 - 0.55));
      for (int h = 0; h < 24; ++h) {
        // Occasional outages: a station skips an hour.
        if (bern(0.03)) continue;
        WeatherRecord rec;
        rec.station_id = site.id;
        rec.location = site.at;
        rec.timestamp = LocalTime{days[di]} + hours{h} + minutes{51};
        const double diurnal = -std::cos(2.0 * 3.141592653589793 * (h - 3) / 24.0);
        rec.values.temperature = std::round((52.0 + 22.0 * season + 7.0 * diurnal + 4.0 * normal(rng)) * 10.0) / 10.0;
        if (!bern(0.25)) rec.values.precipitation = bern(0.8) ? 0.0 : std::round(unit(rng) * 40.0) / 100.0;
        rec.values.humidity = std::round(std::clamp(65.0 - 12.0 * diurnal + 12.0 * normal(rng), 15.0, 100.0));
        rec.values.visibility = std::round(std::clamp(10.0 - std::abs(2.5 * normal(rng)), 0.2, 10.0) * 10.0) / 10.0;
        if (!bern(0.02)) rec.values.wind_speed = std::round(std::clamp(9.0 + 5.5 * normal(rng), 0.0, 40.0));
        fx.weather.push_back(rec);
      }
    }
  }
  const WeatherIndex index(fx.weather);
  const auto spec = survey_specification();
  const auto truth = survey_truth();
  const UtilityModel model(spec, truth);

  static constexpr std::array<int, 5> kPvCodes = {3, 4, 5, 6, 8};
  static constexpr std::array<int, 4> kPtCodes = {11, 14, 15, 16};
  static constexpr std::array<int, 11> kOtherCodes = {17, 97, 12, 2, 10, 13, 18, 19, 7, 9, 20};
  static constexpr std::array<double, 11> kOtherShares = {29.2, 21.5, 18.2, 6.2, 6.2, 5.5,
                                                          4.4,  3.3,  2.6,  2.2, 0.7};
  std::discrete_distribution<std::size_t> other_code(kOtherShares.begin(), kOtherShares.end());

  for (std::size_t p = 0; p < n_persons; ++p) {
    RawTripRecord person;
    person.household_id = fmt::format("h{:05d}", p / 2);
    person.person_id = fmt::format("{}", p % 2 + 1);
    const double age_u = unit(rng);
    person.age = age_u < 0.04 ? 12 + static_cast<int>(unit(rng) * 6)
                : age_u < 0.06 ? 18 + static_cast<int>(unit(rng) * 7)
                : age_u < 0.14 ? 25 + static_cast<int>(unit(rng) * 20)
                : age_u < 0.50 ? 45 + static_cast<int>(unit(rng) * 20)
                               : 65 + static_cast<int>(unit(rng) * 25);
    person.disability = bern(0.85);
    person.gender = bern(0.43) ? Gender::Male : Gender::Female;
    person.worker = bern(0.16);
    person.driver = bern(0.54);
    if (!bern(0.03)) person.race = bern(0.9) ? Race::White : Race::NonWhite;
    person.hispanic = bern(0.05);
    person.education = bern(0.7) ? Education::LessThanBachelor : Education::BachelorOrHigher;
    if (!bern(0.03)) {
      const double u = unit(rng);
      person.income = u < 0.64 ? IncomeBand::Under50k
                    : u < 0.80 ? IncomeBand::From50kTo75k
                    : u < 0.88 ? IncomeBand::From75kTo100k
                    : u < 0.98 ? IncomeBand::From100kTo200k
                               : IncomeBand::Over200k;
    }
    person.medical_devices.emplace();
    if (bern(0.42)) person.medical_devices->insert("cane");
    if (bern(0.20)) person.medical_devices->insert("walker");
    if (bern(0.07)) person.medical_devices->insert("manual_wheelchair");
    if (bern(0.03)) person.medical_devices->insert("crutch");
    if (bern(0.01)) person.medical_devices->insert("dog_assistance");
    person.health_poor = bern(0.10);
    person.born_in_us = bern(0.93);
    person.works_from_home = bern(0.03);
    const auto& home = kSites[static_cast<std::size_t>(unit(rng) * kSites.size())];

    const auto z = person_draws(spec, rng);
    // One travel day per person; trips chain from the previous destination.
    const auto day_index = static_cast<std::size_t>(unit(rng) * days.size());
    int clock = 6 * 60 + static_cast<int>(unit(rng) * 6 * 60);
    GeoPoint here{home.at.lat + 0.25 * (unit(rng) - 0.5), home.at.lon + 0.25 * (unit(rng) - 0.5)};
    const std::size_t n_trips = 1 + static_cast<std::size_t>(unit(rng) * 3);
    for (std::size_t t = 0; t < n_trips && clock < 23 * 60; ++t) {
      RawTripRecord r = person;
      r.trip_id = fmt::format("{}", t + 1);
      r.origin = GeoPoint{std::round(here.lat * 1e5) / 1e5, std::round(here.lon * 1e5) / 1e5};
      const bool loop = bern(0.03);
      const double miles = loop ? 0.2 + unit(rng) * 1.5 : std::min(std::exp(0.9 + 1.5 * normal(rng)), 150.0);
      r.trip_miles = std::round(miles * 1000.0) / 1000.0;
      if (loop) {
        r.destination = r.origin;
      } else {
        // Network distance runs about 25% above the straight line.
        const double reach = std::min(miles, 60.0) / 1.25;
        const double bearing = 2.0 * 3.141592653589793 * unit(rng);
        const double lat = r.origin->lat + reach / 69.0 * std::cos(bearing);
        const double lon = r.origin->lon + reach / 52.0 * std::sin(bearing);
        r.destination = GeoPoint{std::round(lat * 1e5) / 1e5, std::round(lon * 1e5) / 1e5};
      }
      const double mph = std::exp(std::log(18.0) + 0.6 * normal(rng));
      r.trip_minutes = std::max(1.0, std::round(miles / mph * 60.0 + 3.0 * unit(rng)));
      if (bern(0.002)) r.trip_miles = 0.0;  // unusable survey measurement
      r.start_time = LocalTime{days[day_index]} + minutes{clock};
      r.end_time = *r.start_time + minutes{static_cast<int>(*r.trip_minutes)};
      clock += static_cast<int>(*r.trip_minutes) + 15 + static_cast<int>(unit(rng) * 180);
      here = *r.destination;
      r.origin_nyc = home.nyc;
      r.dest_nyc = home.nyc;
      r.origin_urban = home.urban || bern(0.2);
      r.dest_urban = home.urban || bern(0.2);
      r.purpose = bern(0.3) ? TripPurpose::Work : TripPurpose::NonWork;
      r.home_based = bern(0.66);
      r.travel_month = static_cast<unsigned>(year_month_day{days[day_index]}.month());
      r.weekday = weekday{days[day_index]}.iso_encoding() <= 5;
      r.raw_mode = 3;

      if (r.disability && r.age >= kAdultAge && r.trip_miles > 0.0) {
        auto obs = recode(r);
        std::vector<ChoiceObservation> one{obs};
        obs = fuse(std::move(one), index).front();
        bool complete = true;
        for (const auto& name : spec.covariates()) complete = complete && obs.covariate(name).has_value();
        if (complete) {
          const auto x = covariate_row(spec, obs);
          const auto probs = mnl_probabilities(model.utilities(x, obs.available, z), obs.available);
          switch (sample_choice(probs, rng)) {
            case Alternative::PersonalVehicle:
              r.raw_mode = kPvCodes[static_cast<std::size_t>(unit(rng) * kPvCodes.size())];
              break;
            case Alternative::PublicTransport:
              r.raw_mode = kPtCodes[static_cast<std::size_t>(unit(rng) * kPtCodes.size())];
              break;
            case Alternative::Walk:
              r.raw_mode = 1;
              break;
            case Alternative::OtherMode:
              r.raw_mode = kOtherCodes[other_code(rng)];
              break;
          }
        }
      }
      fx.trips.push_back(std::move(r));
    }
  }
  return fx;
}

}  // namespace modechoice
