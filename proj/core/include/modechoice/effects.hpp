#pragma once

#include <span>
#include <string>
#include <vector>

#include "modechoice/alternative.hpp"
#include "modechoice/choice_data.hpp"
#include "modechoice/estimate.hpp"
#include "modechoice/likelihood.hpp"
#include "modechoice/quasirandom.hpp"

namespace modechoice {

struct MarginalEffectsRow {
  std::string term;
  /// Alternative whose utility the term enters.
  Alternative defined_for = Alternative::PersonalVehicle;
  /// Discrete 0 -> 1 change (binary covariate) versus derivative (continuous).
  bool discrete = false;
  /// Average change in each alternative's choice probability.
  PerAlternative effects{};
};

struct MarginalEffectsTable {
  std::vector<MarginalEffectsRow> rows;
};

/// Sample-average marginal effects of the named terms (all non-constant terms
/// when `terms` is empty). Each row perturbs only its own term's covariate
/// value. Probabilities are simulated over the same draws as estimation.
/// Throws std::invalid_argument for a term not in the specification.
MarginalEffectsTable marginal_effects(const EstimationResult& result, const ChoiceData& data,
                                      const DrawMatrix& draws,
                                      std::span<const std::string> terms = {},
                                      unsigned workers = 1);

/// Rebuilds the estimation sample and draws from result.options.
MarginalEffectsTable marginal_effects(const EstimationResult& result,
                                      std::span<const ChoiceObservation> observations,
                                      std::span<const std::string> terms = {});

/// Mass of N(mean, sd^2) below zero. Throws std::invalid_argument unless sd > 0.
double share_below_zero(double mean, double sd);

}  // namespace modechoice
