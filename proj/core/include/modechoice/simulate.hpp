#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "modechoice/choice_data.hpp"
#include "modechoice/model_spec.hpp"
#include "modechoice/weather.hpp"

namespace modechoice {

struct CovariateDistribution {
  enum class Kind { Bernoulli, Normal, Uniform };
  Kind kind = Kind::Bernoulli;
  /// Bernoulli: p. Normal: mean. Uniform: lower bound.
  double a = 0.5;
  /// Normal: sd. Uniform: upper bound.
  double b = 0.0;
};

/// Synthetic choices drawn from a known model; the oracle behind the
/// parameter-recovery checks.
struct ChoiceSimulation {
  ModelSpecification spec;
  /// In the specification's parameter layout; sds must be >= 0.
  std::vector<double> true_parameters;
  /// Covariates not listed here are Bernoulli(0.5).
  std::map<std::string, CovariateDistribution> covariates;
  std::size_t n_observations = 5000;
  /// Random coefficients are drawn once per person and shared by that
  /// person's trips.
  std::size_t trips_per_person = 1;
  std::uint64_t seed = 0;
};

/// All alternatives available, unit weights, every covariate present.
std::vector<ChoiceObservation> simulate_choices(const ChoiceSimulation& sim);

/// {"specification": {...}, "parameters": {"label": value, ...},
///  "covariates": {"name": {"dist": "bernoulli|normal|uniform", ...}},
///  "n_observations": N, "trips_per_person": T}. The seed is supplied
/// separately. Throws SpecError on a malformed document.
ChoiceSimulation simulation_from_json(const nlohmann::json& doc, std::uint64_t seed);

/// A raw survey extract plus station archive whose modes follow
/// survey_specification() at survey_truth(), including weather effects.
struct SurveyFixture {
  std::vector<RawTripRecord> trips;
  std::vector<WeatherRecord> weather;
};

SurveyFixture simulate_survey(std::size_t n_persons, std::uint64_t seed);

ModelSpecification survey_specification();
std::vector<double> survey_truth();

}  // namespace modechoice
