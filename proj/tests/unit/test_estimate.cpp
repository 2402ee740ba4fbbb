#include <cmath>
#include <cstring>

#include "doctest.h"
#include "modechoice/errors.hpp"
#include "modechoice/estimate.hpp"
#include "modechoice/simulate.hpp"
#include "oracles.hpp"

using namespace modechoice;

namespace {

using A = Alternative;

Term fixed(const char* name, const char* cov, A alt) { return {name, cov, alt, TermKind::Fixed}; }
Term random_term(const char* name, const char* cov, A alt) {
  return {name, cov, alt, TermKind::RandomNormal};
}
Term constant(const char* name, A alt) { return {name, std::string(kConstant), alt, TermKind::Fixed}; }

ChoiceSimulation mnl_simulation(std::size_t n, std::uint64_t seed) {
  ChoiceSimulation sim;
  sim.spec = ModelSpecification({constant("pv", A::PersonalVehicle), constant("pt", A::PublicTransport),
                                 constant("walk", A::Walk), fixed("pv_x", "x", A::PersonalVehicle),
                                 fixed("pt_d", "d", A::PublicTransport)});
  sim.true_parameters = {1.0, -0.5, 0.3, 0.8, -1.2};
  sim.covariates["x"] = {CovariateDistribution::Kind::Normal, 0.0, 1.0};
  sim.n_observations = n;
  sim.seed = seed;
  return sim;
}

ChoiceSimulation rpl_simulation(std::size_t n, std::uint64_t seed) {
  ChoiceSimulation sim;
  sim.spec = ModelSpecification({constant("pv", A::PersonalVehicle), constant("pt", A::PublicTransport),
                                 random_term("oth_x", "x", A::OtherMode)});
  sim.true_parameters = {0.5, -0.3, -2.5, 2.8};
  sim.covariates["x"] = {CovariateDistribution::Kind::Uniform, 0.0, 1.0};
  sim.n_observations = n;
  sim.seed = seed;
  return sim;
}

ChoiceObservation plain(A chosen, AvailabilityMask avail) {
  ChoiceObservation o;
  o.obs_id = "o";
  o.person_id = "p";
  o.chosen = chosen;
  o.available = avail;
  return o;
}

}  // namespace

TEST_CASE("null log-likelihood examples") {
  std::vector<ChoiceObservation> obs(10, plain(A::Walk, kAllAvailable));
  CHECK(null_loglik(obs) == doctest::Approx(10 * std::log(0.25)).epsilon(1e-15));
  obs = {plain(A::Walk, kAllAvailable), plain(A::Walk, {true, false, true, false}),
         plain(A::OtherMode, {false, true, true, true})};
  CHECK(null_loglik(obs) == doctest::Approx(std::log(0.25) + std::log(0.5) + std::log(1.0 / 3.0)).epsilon(1e-15));
  obs[0].weight = 2.0;
  CHECK(null_loglik(obs) == doctest::Approx(2 * std::log(0.25) + std::log(0.5) + std::log(1.0 / 3.0)).epsilon(1e-15));
}

TEST_CASE("null log-likelihood from prepared data matches the observation overload") {
  const auto obs = simulate_choices(mnl_simulation(300, 1));
  const auto sim = mnl_simulation(300, 1);
  CHECK(null_loglik(ChoiceData::build(sim.spec, obs)) == doctest::Approx(null_loglik(obs)).epsilon(1e-14));
}

TEST_CASE("pseudo R-squared examples") {
  CHECK(pseudo_r2(-10914.30, -2787.27) == doctest::Approx(0.744622).epsilon(1e-6));
  CHECK(std::round(pseudo_r2(-10914.30, -2787.27) * 100) / 100 == 0.74);
  CHECK(pseudo_r2(-100.0, -100.0) == 0.0);
  CHECK_THROWS_AS(pseudo_r2(0.0, -1.0), std::invalid_argument);
}

TEST_CASE("p-value examples") {
  CHECK(p_value(0.0) == 1.0);
  CHECK(p_value(-2.36) == doctest::Approx(0.018275).epsilon(1e-4));
  CHECK(p_value(2.21) == doctest::Approx(0.027105).epsilon(1e-4));
  CHECK(p_value(9.43) < 0.001);
  CHECK(std::abs(p_value(1.96) - 0.05) <= 5e-4);
  CHECK(std::abs(p_value(kRetentionCritical) - 0.05) <= 5e-4);
}

TEST_CASE("p-value is symmetric, in [0,1] and decreasing in |t|") {
  double prev = 1.0;
  for (int k = 0; k <= 400; ++k) {
    const double t = k * 0.025;
    const double p = p_value(t);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(p <= prev);
    CHECK(p_value(-t) == p);
    CHECK(p == doctest::Approx(2.0 * oracle::upper_tail(t)).epsilon(1e-13));
    prev = p;
  }
}

TEST_CASE("numerical Hessian of a quadratic recovers its matrix") {
  const double a[3][3] = {{-4.0, 1.0, 0.5}, {1.0, -3.0, 0.2}, {0.5, 0.2, -2.0}};
  const GradientObjective f = [&](std::span<const double> x, std::span<double> g) {
    double v = 0.0;
    for (int i = 0; i < 3; ++i) {
      double row = 0.0;
      for (int j = 0; j < 3; ++j) row += a[i][j] * x[j];
      if (!g.empty()) g[i] = row + 1.0;
      v += 0.5 * x[i] * row + x[i];
    }
    return v;
  };
  const std::vector<double> x = {0.3, -2.0, 5.0};
  const auto h = numerical_hessian(f, x);
  REQUIRE(h.size() == 9);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(h[i * 3 + j] == doctest::Approx(a[i][j]).epsilon(1e-8));
  }
}

TEST_CASE("intercept-only model on equal shares stays at zero") {
  std::vector<ChoiceObservation> obs;
  for (int n = 0; n < 400; ++n) obs.push_back(plain(alternative_at(n % 4), kAllAvailable));
  const ModelSpecification spec({constant("pv", A::PersonalVehicle), constant("pt", A::PublicTransport),
                                 constant("walk", A::Walk)});
  const auto r = maximize(spec, obs, {});
  CHECK(r.converged);
  for (const auto& p : r.parameters) CHECK(std::abs(p.estimate) < 1e-6);
  CHECK(r.ll_beta == doctest::Approx(r.ll_zero).epsilon(1e-12));
  CHECK(r.pseudo_r2 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("MNL recovery at N = 5000: every estimate within 3 standard errors") {
  const auto sim = mnl_simulation(5000, 11);
  const auto obs = simulate_choices(sim);
  const auto r = maximize(sim.spec, obs, {});
  REQUIRE(r.converged);
  REQUIRE(r.covariance_ok);
  for (std::size_t k = 0; k < r.parameters.size(); ++k) {
    const auto& p = r.parameters[k];
    CAPTURE(p.label);
    REQUIRE(p.std_error);
    CHECK(std::abs(p.estimate - sim.true_parameters[k]) < 3.0 * *p.std_error);
    CHECK(*p.t_stat == doctest::Approx(p.estimate / *p.std_error));
    CHECK(*p.p_value == doctest::Approx(p_value(*p.t_stat)));
  }
  CHECK(r.ll_beta >= r.ll_start);
  CHECK(r.ll_beta >= r.ll_zero);
  CHECK(r.pseudo_r2 > 0.0);
  CHECK(r.pseudo_r2 < 1.0);
  CHECK(r.n_observations == 5000);
  CHECK(r.n_dropped == 0);
}

TEST_CASE("estimation is bit-reproducible and independent of the worker count") {
  const auto sim = rpl_simulation(1500, 3);
  const auto obs = simulate_choices(sim);
  EstimationOptions o;
  o.draws = 50;
  const auto a = maximize(sim.spec, obs, o);
  const auto b = maximize(sim.spec, obs, o);
  o.workers = 3;
  const auto c = maximize(sim.spec, obs, o);
  REQUIRE(a.raw_parameters.size() == 4);
  CHECK(std::memcmp(a.raw_parameters.data(), b.raw_parameters.data(), 4 * sizeof(double)) == 0);
  CHECK(std::memcmp(a.raw_parameters.data(), c.raw_parameters.data(), 4 * sizeof(double)) == 0);
  CHECK(a.ll_beta == c.ll_beta);
  CHECK(a.iterations == c.iterations);
}

TEST_CASE("random-parameter estimates at R = 200 and R = 400 differ by less than 2 standard errors") {
  const auto sim = rpl_simulation(3000, 5);
  const auto obs = simulate_choices(sim);
  EstimationOptions o;
  o.draws = 200;
  const auto r200 = maximize(sim.spec, obs, o);
  o.draws = 400;
  const auto r400 = maximize(sim.spec, obs, o);
  REQUIRE(r200.converged);
  REQUIRE(r400.converged);
  for (std::size_t k = 0; k < r200.parameters.size(); ++k) {
    CAPTURE(r200.parameters[k].label);
    REQUIRE(r200.parameters[k].std_error);
    CHECK(std::abs(r200.parameters[k].estimate - r400.parameters[k].estimate) <
          2.0 * *r200.parameters[k].std_error);
  }
  const auto* sd = r200.find("oth_x.sd");
  REQUIRE(sd != nullptr);
  CHECK(sd->estimate > 0.0);
  CHECK(sd->role == ParameterRole::StdDev);
}

TEST_CASE("zero sds reproduce the MNL log-likelihood at the start") {
  const auto sim = rpl_simulation(500, 8);
  const auto obs = simulate_choices(sim);
  EstimationOptions o;
  o.draws = 30;
  o.start = std::vector<double>{0.2, -0.1, -1.0, 0.0};
  o.max_iterations = 1;
  const auto r = maximize(sim.spec, obs, o);
  const ModelSpecification fixed_spec({constant("pv", A::PersonalVehicle), constant("pt", A::PublicTransport),
                                       fixed("oth_x", "x", A::OtherMode)});
  EstimationOptions f;
  f.start = std::vector<double>{0.2, -0.1, -1.0};
  f.max_iterations = 1;
  CHECK(r.ll_start == doctest::Approx(maximize(fixed_spec, obs, f).ll_start).epsilon(1e-14));
}

TEST_CASE("iteration cap reports non-convergence with a message") {
  const auto sim = mnl_simulation(1000, 2);
  const auto obs = simulate_choices(sim);
  EstimationOptions o;
  o.max_iterations = 1;
  const auto r = maximize(sim.spec, obs, o);
  CHECK_FALSE(r.converged);
  CHECK_FALSE(r.message.empty());
  CHECK(r.ll_beta >= r.ll_start);
}

TEST_CASE("outer-product Hessian gives comparable standard errors") {
  const auto sim = mnl_simulation(5000, 13);
  const auto obs = simulate_choices(sim);
  const auto numerical = maximize(sim.spec, obs, {});
  EstimationOptions o;
  o.hessian = HessianMethod::OuterProduct;
  const auto opg = maximize(sim.spec, obs, o);
  REQUIRE(opg.covariance_ok);
  for (std::size_t k = 0; k < numerical.parameters.size(); ++k) {
    CHECK(opg.parameters[k].estimate == doctest::Approx(numerical.parameters[k].estimate).epsilon(1e-5));
    CHECK(*opg.parameters[k].std_error == doctest::Approx(*numerical.parameters[k].std_error).epsilon(0.1));
  }
}

TEST_CASE("warm start from the fixed-coefficient model") {
  const auto sim = rpl_simulation(1500, 4);
  const auto obs = simulate_choices(sim);
  EstimationOptions o;
  o.draws = 50;
  const auto cold = maximize(sim.spec, obs, o);
  o.mnl_warm_start = true;
  const auto warm = maximize(sim.spec, obs, o);
  REQUIRE(cold.converged);
  REQUIRE(warm.converged);
  CHECK(warm.ll_beta == doctest::Approx(cold.ll_beta).epsilon(1e-8));
}

TEST_CASE("maximize argument and data errors") {
  const auto sim = mnl_simulation(50, 1);
  auto obs = simulate_choices(sim);
  EstimationOptions o;
  o.draws = 0;
  CHECK_THROWS_AS(maximize(sim.spec, obs, o), std::invalid_argument);
  o = {};
  o.gradient_tolerance = 0.0;
  CHECK_THROWS_AS(maximize(sim.spec, obs, o), std::invalid_argument);
  o = {};
  o.start = std::vector<double>{1.0};
  CHECK_THROWS(maximize(sim.spec, obs, o));
  for (auto& x : obs) x.incomplete = true;
  CHECK_THROWS_AS(maximize(sim.spec, obs, {}), EstimationError);
}

TEST_CASE("stepwise retention drops exactly the true-zero term") {
  ChoiceSimulation sim;
  sim.spec = ModelSpecification({constant("pv", A::PersonalVehicle), constant("pt", A::PublicTransport),
                                 fixed("pv_x", "x", A::PersonalVehicle), fixed("pt_z", "z", A::PublicTransport),
                                 fixed("walk_d", "d", A::Walk)});
  sim.true_parameters = {0.5, -0.2, 1.0, 0.0, -0.8};
  sim.covariates["x"] = {CovariateDistribution::Kind::Normal, 0.0, 1.0};
  sim.covariates["z"] = {CovariateDistribution::Kind::Normal, 0.0, 1.0};
  sim.n_observations = 5000;
  sim.seed = 21;
  const auto obs = simulate_choices(sim);
  const auto s = stepwise_retain(sim.spec, obs, {});
  REQUIRE(s.steps.size() == 1);
  CHECK(s.steps[0].term == "pt_z");
  CHECK_FALSE(s.steps[0].demoted);
  CHECK(s.steps[0].abs_t < kRetentionCritical);
  CHECK_FALSE(s.spec.find("pt_z"));
  CHECK(s.spec.terms().size() == 4);
  for (const auto& p : s.result.parameters) {
    if (sim.spec.terms()[sim.spec.find(p.label).value()].covariate != kConstant) {
      CHECK(std::abs(*p.t_stat) >= kRetentionCritical);
    }
  }
}

TEST_CASE("stepwise retention demotes a random term whose sd is zero") {
  ChoiceSimulation sim;
  sim.spec = ModelSpecification({constant("pv", A::PersonalVehicle), constant("pt", A::PublicTransport),
                                 random_term("pv_x", "x", A::PersonalVehicle)});
  sim.true_parameters = {0.5, -0.2, 1.2, 0.0};
  sim.covariates["x"] = {CovariateDistribution::Kind::Normal, 0.0, 1.0};
  sim.n_observations = 3000;
  sim.seed = 4;
  const auto obs = simulate_choices(sim);
  EstimationOptions o;
  o.draws = 50;
  const auto s = stepwise_retain(sim.spec, obs, o);
  REQUIRE(s.steps.size() == 1);
  CHECK(s.steps[0].term == "pv_x");
  CHECK(s.steps[0].demoted);
  REQUIRE(s.spec.find("pv_x"));
  CHECK(s.spec.terms()[*s.spec.find("pv_x")].kind == TermKind::Fixed);
  CHECK(s.spec.n_random() == 0);
}
