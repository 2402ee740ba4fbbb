#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modechoice/bfgs.hpp"
#include "modechoice/choice_data.hpp"
#include "modechoice/likelihood.hpp"
#include "modechoice/model_spec.hpp"
#include "modechoice/quasirandom.hpp"

namespace modechoice {

enum class HessianMethod { Numerical, OuterProduct };

std::string_view to_string(HessianMethod m) noexcept;

struct EstimationOptions {
  std::size_t draws = 200;
  std::size_t skip = kDefaultHaltonSkip;
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-6;
  HessianMethod hessian = HessianMethod::Numerical;
  /// Warm-start vector in the specification's parameter layout; zeros for
  /// coefficients and means with 0.1 for sds when absent.
  std::optional<std::vector<double>> start;
  /// Fit the all-fixed version first and seed the means with its estimates.
  bool mnl_warm_start = false;
  DrawScheme draw_scheme = DrawScheme::PerPerson;
  unsigned workers = 1;

  /// Throws std::invalid_argument on a zero draw count or a nonpositive tolerance.
  void validate() const;
};

struct ParameterEstimate {
  std::string label;
  std::size_t term = 0;
  ParameterRole role = ParameterRole::Coefficient;
  /// Reported value; standard deviations are reported as |sd|.
  double estimate = 0.0;
  std::optional<double> std_error;
  std::optional<double> t_stat;
  std::optional<double> p_value;
};

struct EstimationResult {
  ModelSpecification spec;
  EstimationOptions options;
  std::vector<ParameterEstimate> parameters;
  /// Optimizer coordinates (sds keep their sign).
  std::vector<double> raw_parameters;
  std::size_t n_observations = 0;
  std::size_t n_dropped = 0;
  double ll_zero = 0.0;
  double ll_start = 0.0;
  double ll_beta = 0.0;
  double pseudo_r2 = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  bool covariance_ok = false;
  std::string message;

  const ParameterEstimate* find(std::string_view label) const noexcept;
};

/// Log-likelihood of equal shares over each observation's available set.
double null_loglik(const ChoiceData& data);
double null_loglik(std::span<const ChoiceObservation> observations);

/// 1 - ll_beta / ll_zero; throws std::invalid_argument when ll_zero == 0.
double pseudo_r2(double ll_zero, double ll_beta);

/// Two-sided standard-normal tail probability 2 (1 - Phi(|t|)).
double p_value(double t);

/// Two-sided critical value of the retention rule (95% level).
inline constexpr double kRetentionCritical = 1.96;

/// Hessian of f at x by central differences of its analytic gradient, step
/// 1e-4 (1 + |x_k|) per coordinate, symmetrized. Row-major K x K.
std::vector<double> numerical_hessian(const GradientObjective& objective,
                                      std::span<const double> x);

/// Maximum simulated likelihood on a prepared sample with fixed draws.
EstimationResult maximize(const ModelSpecification& spec, const ChoiceData& data,
                          const DrawMatrix& draws, const EstimationOptions& options);

/// Builds the sample (dropping incomplete rows) and the Halton draws, then
/// maximizes. Throws EstimationError when no usable observation remains or
/// the objective is not finite at the start.
EstimationResult maximize(const ModelSpecification& spec,
                          std::span<const ChoiceObservation> observations,
                          const EstimationOptions& options);

struct RetentionStep {
  std::string term;
  /// True when a random term lost its sd; false when the term was removed.
  bool demoted = false;
  double abs_t = 0.0;
};

struct StepwiseResult {
  ModelSpecification spec;
  EstimationResult result;
  std::vector<RetentionStep> steps;
};

/// Re-estimates while some non-constant term fails the 95% rule, removing
/// one term per round (smallest |t| first). A random term is judged on its
/// sd and demoted to fixed when the sd fails; fixed terms are judged on the
/// coefficient. Constants are always kept. Throws EstimationError when the
/// covariance matrix is unavailable.
StepwiseResult stepwise_retain(const ModelSpecification& spec,
                               std::span<const ChoiceObservation> observations,
                               const EstimationOptions& options);

}  // namespace modechoice
