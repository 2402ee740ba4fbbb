#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "modechoice/alternative.hpp"
#include "modechoice/choice_data.hpp"
#include "modechoice/model_spec.hpp"
#include "modechoice/quasirandom.hpp"

namespace modechoice {

using Utilities = PerAlternative;
using Probabilities = PerAlternative;

/// Simulated log-likelihood floor applied to each probability before ln().
inline constexpr double kProbabilityFloor = 1e-300;

/// How observations map onto draw blocks: one block per person shared by all
/// of that person's trips, or one block per trip.
enum class DrawScheme { PerPerson, PerTrip };

std::string_view to_string(DrawScheme scheme) noexcept;

/// Dense estimation sample for one specification: a covariate row per
/// observation with one column per term (1.0 for constants). Rows that are
/// incomplete or miss a referenced covariate are dropped and counted.
class ChoiceData {
 public:
  ChoiceData() = default;

  /// Throws InputError for an observation whose chosen alternative is
  /// unavailable or that has fewer than two available alternatives.
  static ChoiceData build(const ModelSpecification& spec,
                          std::span<const ChoiceObservation> observations,
                          DrawScheme scheme = DrawScheme::PerPerson);

  std::size_t size() const noexcept { return chosen_.size(); }
  bool empty() const noexcept { return chosen_.empty(); }
  std::size_t n_terms() const noexcept { return n_terms_; }
  std::size_t n_individuals() const noexcept { return n_individuals_; }
  std::size_t dropped() const noexcept { return dropped_; }

  std::span<const double> row(std::size_t n) const noexcept {
    return {x_.data() + n * n_terms_, n_terms_};
  }
  std::span<double> mutable_row(std::size_t n) noexcept { return {x_.data() + n * n_terms_, n_terms_}; }
  Alternative chosen(std::size_t n) const noexcept { return chosen_[n]; }
  const AvailabilityMask& available(std::size_t n) const noexcept { return available_[n]; }
  double weight(std::size_t n) const noexcept { return weight_[n]; }
  std::size_t individual(std::size_t n) const noexcept { return individual_[n]; }
  /// Position of row n in the observation sequence passed to build().
  std::size_t source(std::size_t n) const noexcept { return source_[n]; }

  /// Rows in the given order; individual indices are kept so the same draw
  /// matrix applies.
  ChoiceData subset(std::span<const std::size_t> rows) const;

 private:
  std::size_t n_terms_ = 0;
  std::size_t n_individuals_ = 0;
  std::size_t dropped_ = 0;
  std::vector<double> x_;
  std::vector<Alternative> chosen_;
  std::vector<AvailabilityMask> available_;
  std::vector<double> weight_;
  std::vector<std::size_t> individual_;
  std::vector<std::size_t> source_;
};

/// Covariate row for one observation in term order. Throws InputError naming
/// the term and observation when a referenced covariate is missing.
std::vector<double> covariate_row(const ModelSpecification& spec, const ChoiceObservation& obs);

/// A specification bound to one parameter vector.
class UtilityModel {
 public:
  /// Throws std::invalid_argument when the parameter count does not match or
  /// a parameter is not finite.
  UtilityModel(const ModelSpecification& spec, std::span<const double> params);

  const ModelSpecification& spec() const noexcept { return *spec_; }

  /// Coefficient of term t for the given per-dimension normals.
  double coefficient(std::size_t t, std::span<const double> draw) const noexcept;

  /// Systematic utilities; unavailable alternatives get -infinity.
  Utilities utilities(std::span<const double> x, const AvailabilityMask& available,
                      std::span<const double> draw) const noexcept;

  /// Choice probabilities averaged over an individual's R draws. Collapses to
  /// a single logit evaluation when no random term has a nonzero sd.
  Probabilities simulated_probabilities(std::span<const double> x,
                                        const AvailabilityMask& available,
                                        std::span<const double> individual_draws,
                                        std::size_t n_draws) const;

  /// True when some random term has a nonzero sd.
  bool has_active_random() const noexcept { return active_random_; }

 private:
  const ModelSpecification* spec_;
  std::vector<double> mean_;    // per term: coefficient or mean
  std::vector<double> abs_sd_;  // per term: |sd|, 0 for fixed terms
  bool active_random_ = false;
};

/// Logit probabilities with max-subtraction; unavailable alternatives get 0.
/// Throws std::invalid_argument when nothing is available.
Probabilities mnl_probabilities(const Utilities& utilities, const AvailabilityMask& available);

/// Convenience single-observation forms of the above.
Utilities utilities(const ModelSpecification& spec, std::span<const double> params,
                    const ChoiceObservation& obs, std::span<const double> draw);

/// Probability of the observed choice averaged over the individual's draws.
double simulated_probability(const ModelSpecification& spec, std::span<const double> params,
                             const ChoiceObservation& obs, const DrawMatrix& draws,
                             std::size_t individual);

/// Simulated log-likelihood sum_n w_n ln max(P_n, floor) with its analytic
/// gradient. Evaluation is split into fixed blocks of observations reduced in
/// block order, so results are bit-identical for any worker count.
class SimulatedLikelihood {
 public:
  /// Throws std::invalid_argument for empty data or a draw matrix that does not
  /// cover the data's individuals and the specification's random dimensions.
  SimulatedLikelihood(const ModelSpecification& spec, const ChoiceData& data,
                      const DrawMatrix& draws, unsigned workers = 1);

  std::size_t n_parameters() const noexcept { return spec_->n_parameters(); }

  double value(std::span<const double> params) const;
  double value_and_gradient(std::span<const double> params, std::span<double> gradient) const;

  /// Per-observation weighted score vectors, row-major N x K.
  std::vector<double> scores(std::span<const double> params) const;

  /// Simulated probability of each observation's chosen alternative.
  std::vector<double> chosen_probabilities(std::span<const double> params) const;

  const ChoiceData& data() const noexcept { return *data_; }
  const DrawMatrix& draws() const noexcept { return *draws_; }

 private:
  const ModelSpecification* spec_;
  const ChoiceData* data_;
  const DrawMatrix* draws_;
  unsigned workers_;
};

}  // namespace modechoice
