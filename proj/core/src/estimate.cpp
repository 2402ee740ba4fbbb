#include "modechoice/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "modechoice/errors.hpp"

namespace modechoice {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Covariance from an information matrix; nullopt when it is not positive definite.
std::optional<Eigen::MatrixXd> invert_information(const Eigen::MatrixXd& info) {
  if (!info.allFinite()) return std::nullopt;
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  if (!cov.allFinite() || (cov.diagonal().array() <= 0.0).any()) return std::nullopt;
  return cov;
}

std::vector<double> starting_point(const ModelSpecification& spec, const ChoiceData& data,
                                   const DrawMatrix& draws, const EstimationOptions& options) {
  if (options.start) {
    if (options.start->size() != spec.n_parameters()) {
      throw std::invalid_argument(fmt::format("start vector has {} values, specification needs {}",
                                              options.start->size(), spec.n_parameters()));
    }
    return *options.start;
  }
  auto start = spec.default_start();
  if (!options.mnl_warm_start || spec.n_random() == 0) return start;

  std::vector<Term> fixed_terms = spec.terms();
  for (auto& t : fixed_terms) t.kind = TermKind::Fixed;
  const ModelSpecification fixed(std::move(fixed_terms), spec.reference());
  EstimationOptions inner = options;
  inner.mnl_warm_start = false;
  inner.start.reset();
  const DrawMatrix no_draws = build_draws(draws.n_individuals(), 1, 0, 0);
  const auto mnl = maximize(fixed, data, no_draws, inner);
  for (std::size_t t = 0; t < spec.terms().size(); ++t) {
    start[spec.offset(t)] = mnl.raw_parameters[fixed.offset(t)];
  }
  return start;
}

}  // namespace

std::string_view to_string(HessianMethod m) noexcept {
  return m == HessianMethod::Numerical ? "numerical" : "outer_product";
}

void EstimationOptions::validate() const {
  if (draws == 0) throw std::invalid_argument("draw count must be at least 1");
  if (!(gradient_tolerance > 0.0)) throw std::invalid_argument("gradient tolerance must be positive");
  if (max_iterations == 0) throw std::invalid_argument("max_iterations must be positive");
}

const ParameterEstimate* EstimationResult::find(std::string_view label) const noexcept {
  for (const auto& p : parameters) {
    if (p.label == label) return &p;
  }
  return nullptr;
}

double null_loglik(const ChoiceData& data) {
  double ll = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    ll -= data.weight(n) * std::log(static_cast<double>(count_available(data.available(n))));
  }
  return ll;
}

double null_loglik(std::span<const ChoiceObservation> observations) {
  double ll = 0.0;
  for (const auto& obs : observations) {
    ll -= obs.weight * std::log(static_cast<double>(count_available(obs.available)));
  }
  return ll;
}

double pseudo_r2(double ll_zero, double ll_beta) {
  if (ll_zero == 0.0) throw std::invalid_argument("pseudo_r2: null log-likelihood is zero");
  return 1.0 - ll_beta / ll_zero;
}

double p_value(double t) { return std::erfc(std::abs(t) / std::numbers::sqrt2); }

std::vector<double> numerical_hessian(const GradientObjective& objective,
                                      std::span<const double> x) {
  const std::size_t k = x.size();
  RowMatrix h(k, k);
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> g_plus(k), g_minus(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double step = 1e-4 * (1.0 + std::abs(x[j]));
    probe[j] = x[j] + step;
    objective(probe, g_plus);
    probe[j] = x[j] - step;
    objective(probe, g_minus);
    probe[j] = x[j];
    const double width = 2.0 * step;
    for (std::size_t i = 0; i < k; ++i) {
      h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (g_plus[i] - g_minus[i]) / width;
    }
  }
  const RowMatrix sym = 0.5 * (h + h.transpose());
  return {sym.data(), sym.data() + k * k};
}

EstimationResult maximize(const ModelSpecification& spec, const ChoiceData& data,
                          const DrawMatrix& draws, const EstimationOptions& options) {
  options.validate();
  if (data.empty()) throw EstimationError("no complete observations to estimate on");
  const SimulatedLikelihood ll(spec, data, draws, options.workers);
  const std::size_t k = spec.n_parameters();

  EstimationResult result;
  result.spec = spec;
  result.options = options;
  result.n_observations = data.size();
  result.n_dropped = data.dropped();
  result.ll_zero = null_loglik(data);

  const auto start = starting_point(spec, data, draws, options);
  result.ll_start = ll.value(start);
  if (!std::isfinite(result.ll_start)) {
    throw EstimationError("log-likelihood is not finite at the starting point");
  }

  const GradientObjective negative_ll = [&](std::span<const double> x, std::span<double> g) {
    const double v = ll.value_and_gradient(x, g);
    for (double& gi : g) gi = -gi;
    return -v;
  };
  const auto fit = minimize_bfgs(negative_ll, start,
                                 {options.max_iterations, options.gradient_tolerance, 60});
  result.raw_parameters = fit.x;
  result.ll_beta = -fit.value;
  result.converged = fit.converged;
  result.iterations = fit.iterations;
  result.gradient_norm = fit.gradient_norm;
  result.message = fit.message;
  result.pseudo_r2 = pseudo_r2(result.ll_zero, result.ll_beta);

  Eigen::MatrixXd info(k, k);
  if (options.hessian == HessianMethod::Numerical) {
    // Hessian of -LL is the observed information.
    const auto h = numerical_hessian(negative_ll, fit.x);
    info = Eigen::Map<const RowMatrix>(h.data(), static_cast<Eigen::Index>(k),
                                       static_cast<Eigen::Index>(k));
  } else {
    const auto s = ll.scores(fit.x);
    const Eigen::Map<const RowMatrix> scores(s.data(), static_cast<Eigen::Index>(data.size()),
                                             static_cast<Eigen::Index>(k));
    info = scores.transpose() * scores;
  }
  const auto cov = invert_information(info);
  result.covariance_ok = cov.has_value();

  for (std::size_t j = 0; j < k; ++j) {
    const auto& slot = spec.slots()[j];
    ParameterEstimate pe;
    pe.label = slot.label;
    pe.term = slot.term;
    pe.role = slot.role;
    pe.estimate = slot.role == ParameterRole::StdDev ? std::abs(fit.x[j]) : fit.x[j];
    if (cov) {
      const double se = std::sqrt((*cov)(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
      pe.std_error = se;
      pe.t_stat = pe.estimate / se;
      pe.p_value = p_value(*pe.t_stat);
    }
    result.parameters.push_back(std::move(pe));
  }
  return result;
}

EstimationResult maximize(const ModelSpecification& spec,
                          std::span<const ChoiceObservation> observations,
                          const EstimationOptions& options) {
  options.validate();
  const auto data = ChoiceData::build(spec, observations, options.draw_scheme);
  if (data.empty()) throw EstimationError("no complete observations to estimate on");
  const auto draws = build_draws(data.n_individuals(), options.draws, spec.n_random(), options.skip);
  return maximize(spec, data, draws, options);
}

StepwiseResult stepwise_retain(const ModelSpecification& spec,
                               std::span<const ChoiceObservation> observations,
                               const EstimationOptions& options) {
  StepwiseResult out{spec, {}, {}};
  EstimationOptions opts = options;
  opts.start.reset();
  for (;;) {
    out.result = maximize(out.spec, observations, opts);
    if (!out.result.covariance_ok) {
      throw EstimationError("retention rule needs standard errors, but the information matrix "
                            "is not invertible");
    }
    std::optional<std::size_t> worst;
    double worst_t = kRetentionCritical;
    bool demote = false;
    const auto& terms = out.spec.terms();
    for (std::size_t t = 0; t < terms.size(); ++t) {
      if (terms[t].is_constant()) continue;
      const std::size_t slot = out.spec.offset(t) + (terms[t].is_random() ? 1 : 0);
      const double abs_t = std::abs(*out.result.parameters[slot].t_stat);
      if (abs_t < worst_t) {
        worst = t;
        worst_t = abs_t;
        demote = terms[t].is_random();
      }
    }
    if (!worst) return out;
    out.steps.push_back({terms[*worst].name, demote, worst_t});
    out.spec = demote ? out.spec.with_kind(*worst, TermKind::Fixed) : out.spec.without(*worst);
  }
}

}  // namespace modechoice
