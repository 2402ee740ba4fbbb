#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>

#include "doctest.h"
#include "hermite.hpp"
#include "modechoice/errors.hpp"
#include "modechoice/likelihood.hpp"
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

ChoiceObservation obs_with(std::map<std::string, double> values, A chosen = A::PersonalVehicle,
                           AvailabilityMask avail = kAllAvailable) {
  ChoiceObservation o;
  o.obs_id = "o";
  o.person_id = "p";
  o.chosen = chosen;
  o.available = avail;
  for (const auto& [k, v] : values) o.covariates[k] = v;
  return o;
}

/// Five parameters: three fixed, one random (mean, sd).
ModelSpecification five_parameter_spec() {
  return ModelSpecification({constant("pv", A::PersonalVehicle), constant("pt", A::PublicTransport),
                             fixed("walk_len", "x1", A::Walk), random_term("oth_x2", "x2", A::OtherMode)});
}

std::vector<ChoiceObservation> five_parameter_data(std::size_t n, std::uint64_t seed,
                                                   std::size_t trips_per_person = 1) {
  ChoiceSimulation sim;
  sim.spec = five_parameter_spec();
  sim.true_parameters = {0.5, -0.3, -1.2, -1.0, 1.5};
  sim.covariates["x1"] = {CovariateDistribution::Kind::Normal, 0.0, 1.0};
  sim.covariates["x2"] = {CovariateDistribution::Kind::Uniform, 0.0, 2.0};
  sim.n_observations = n;
  sim.trips_per_person = trips_per_person;
  sim.seed = seed;
  return simulate_choices(sim);
}

}  // namespace

TEST_CASE("utilities: zero vector, one-hot constant, degenerate random term") {
  const ModelSpecification spec({constant("pv", A::PersonalVehicle), fixed("w", "x", A::Walk)});
  const auto o = obs_with({{"x", 3.0}});
  const std::vector<double> zero = {0.0, 0.0};
  CHECK(utilities(spec, zero, o, {}) == Utilities{0, 0, 0, 0});
  const std::vector<double> one = {1.0, 0.0};
  CHECK(utilities(spec, one, o, {}) == Utilities{1, 0, 0, 0});

  const ModelSpecification fixed_spec({fixed("b", "x", A::Walk)});
  const ModelSpecification random_spec({random_term("b", "x", A::Walk)});
  const std::vector<double> fixed_p = {2.0};
  const std::vector<double> random_p = {2.0, 0.0};
  for (double z : {-3.0, 0.0, 1.7}) {
    const std::vector<double> draw = {z};
    CHECK(utilities(random_spec, random_p, o, draw) == utilities(fixed_spec, fixed_p, o, {}));
  }
}

TEST_CASE("utilities: negative sd enters as its absolute value") {
  const ModelSpecification spec({random_term("b", "x", A::Walk)});
  const auto o = obs_with({{"x", 2.0}});
  const std::vector<double> pos = {1.0, 0.5};
  const std::vector<double> neg = {1.0, -0.5};
  const std::vector<double> draw = {1.3};
  CHECK(utilities(spec, pos, o, draw) == utilities(spec, neg, o, draw));
  CHECK(utilities(spec, pos, o, draw)[index_of(A::Walk)] == doctest::Approx(2.0 * (1.0 + 0.5 * 1.3)));
}

TEST_CASE("utilities: unavailable alternatives get minus infinity") {
  const ModelSpecification spec({constant("pv", A::PersonalVehicle)});
  const auto o = obs_with({}, A::PersonalVehicle, {true, false, true, false});
  const std::vector<double> p = {0.3};
  const auto v = utilities(spec, p, o, {});
  CHECK(v[1] == -std::numeric_limits<double>::infinity());
  CHECK(v[3] == -std::numeric_limits<double>::infinity());
  CHECK(v[0] == 0.3);
}

TEST_CASE("missing covariate is rejected naming the term and observation") {
  const ModelSpecification spec({fixed("walk_len", "log_trip_length", A::Walk)});
  auto o = obs_with({});
  o.obs_id = "h1-2/3";
  CHECK_THROWS_WITH_AS(covariate_row(spec, o), doctest::Contains("walk_len"), InputError);
  CHECK_THROWS_WITH_AS(covariate_row(spec, o), doctest::Contains("h1-2/3"), InputError);
}

TEST_CASE("MNL examples against a hand softmax") {
  CHECK(mnl_probabilities({0, 0, 0, 0}, kAllAvailable) == Probabilities{0.25, 0.25, 0.25, 0.25});
  const auto p = mnl_probabilities({std::log(2.0), 0, 0, 0}, kAllAvailable);
  const auto hand = oracle::softmax({std::log(2.0), 0, 0, 0}, {true, true, true, true});
  for (int a = 0; a < 4; ++a) CHECK(p[a] == doctest::Approx(hand[a]).epsilon(1e-15));
  CHECK(p[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.2).epsilon(1e-15));
  const auto shifted = mnl_probabilities({std::log(2.0) + 1000, 1000, 1000, 1000}, kAllAvailable);
  for (int a = 0; a < 4; ++a) CHECK(shifted[a] == doctest::Approx(p[a]).epsilon(1e-14));
}

TEST_CASE("MNL with nothing available is rejected") {
  CHECK_THROWS_AS(mnl_probabilities({0, 0, 0, 0}, {false, false, false, false}), std::invalid_argument);
}

TEST_CASE("MNL probabilities: sum to one, lie in [0,1], shift invariant, match the oracle") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> u(0.0, 5.0);
  std::bernoulli_distribution coin(0.7);
  for (int i = 0; i < 5000; ++i) {
    AvailabilityMask avail{};
    std::vector<bool> mask(4);
    do {
      for (int a = 0; a < 4; ++a) mask[a] = avail[a] = coin(rng);
    } while (count_available(avail) == 0);
    Utilities v{};
    std::vector<double> vv(4);
    for (int a = 0; a < 4; ++a) vv[a] = v[a] = u(rng);
    const auto p = mnl_probabilities(v, avail);
    const auto hand = oracle::softmax(vv, mask);
    double sum = 0.0;
    for (int a = 0; a < 4; ++a) {
      CHECK(p[a] >= 0.0);
      CHECK(p[a] <= 1.0);
      if (!avail[a]) CHECK(p[a] == 0.0);
      CHECK(std::abs(p[a] - hand[a]) <= 1e-13);
      sum += p[a];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    const double c = u(rng) * 100.0;
    Utilities shifted = v;
    for (auto& x : shifted) x += c;
    const auto q = mnl_probabilities(shifted, avail);
    for (int a = 0; a < 4; ++a) CHECK(std::abs(q[a] - p[a]) <= 1e-12);
  }
}

TEST_CASE("without random terms the simulated probability is the MNL probability for any R") {
  const ModelSpecification spec({constant("pv", A::PersonalVehicle), fixed("w", "x", A::Walk)});
  const std::vector<double> params = {0.4, -0.7};
  const auto o = obs_with({{"x", 1.5}}, A::Walk);
  const double closed = mnl_probabilities(utilities(spec, params, o, {}), o.available)[index_of(A::Walk)];
  for (std::size_t R : {1u, 7u, 200u}) {
    const auto draws = build_draws(1, R, 0, 0);
    CHECK(simulated_probability(spec, params, o, draws, 0) == closed);
  }
}

TEST_CASE("sd = 0 collapses to the MNL with coefficient equal to the mean") {
  const ModelSpecification random_spec({constant("pv", A::PersonalVehicle), random_term("w", "x", A::Walk)});
  const ModelSpecification fixed_spec({constant("pv", A::PersonalVehicle), fixed("w", "x", A::Walk)});
  const auto o = obs_with({{"x", 0.8}}, A::Walk);
  const std::vector<double> rp = {0.2, -1.1, 0.0};
  const std::vector<double> fp = {0.2, -1.1};
  const auto draws = build_draws(1, 200, 1);
  CHECK(simulated_probability(random_spec, rp, o, draws, 0) ==
        mnl_probabilities(utilities(fixed_spec, fp, o, {}), o.available)[index_of(A::Walk)]);
}

TEST_CASE("one random coefficient: R = 1000 Halton agrees with 64-node Gauss-Hermite") {
  const ModelSpecification spec({constant("pv", A::PersonalVehicle), constant("pt", A::PublicTransport),
                                 random_term("oth", "x", A::OtherMode), fixed("walk", "w", A::Walk)});
  const std::vector<double> params = {0.3, -0.4, -2.5, 2.8, 0.6};
  const auto rule = oracle::gauss_hermite(64);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> x(0.0, 1.5);
  const auto draws = build_draws(100, 1000, 1);
  double worst = 0.0;
  for (std::size_t n = 0; n < 100; ++n) {
    const auto o = obs_with({{"x", x(rng)}, {"w", x(rng)}}, alternative_at(n % 4));
    const double sim = simulated_probability(spec, params, o, draws, n);
    const double quad = oracle::normal_expectation(rule, [&](double z) {
      const double beta = params[2] + params[3] * z;
      const std::vector<double> v = {params[0], params[1], params[4] * o.covariate("w").value(),
                                     beta * o.covariate("x").value()};
      return oracle::softmax(v, {true, true, true, true})[n % 4];
    });
    worst = std::max(worst, std::abs(sim - quad));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("simulated probability is invariant to the order of draws") {
  const auto spec = five_parameter_spec();
  const std::vector<double> params = {0.5, -0.3, -1.2, -1.0, 1.5};
  const UtilityModel model(spec, params);
  const auto o = obs_with({{"x1", 0.3}, {"x2", 1.4}}, A::OtherMode);
  const auto x = covariate_row(spec, o);
  const auto draws = build_draws(1, 64, 1);
  std::vector<double> forward(draws.individual(0).begin(), draws.individual(0).end());
  std::vector<double> reversed(forward.rbegin(), forward.rend());
  std::mt19937 rng(2);
  std::vector<double> shuffled = forward;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto p0 = model.simulated_probabilities(x, o.available, forward, 64);
  const auto p1 = model.simulated_probabilities(x, o.available, reversed, 64);
  const auto p2 = model.simulated_probabilities(x, o.available, shuffled, 64);
  for (int a = 0; a < 4; ++a) {
    CHECK(p1[a] == doctest::Approx(p0[a]).epsilon(1e-14));
    CHECK(p2[a] == doctest::Approx(p0[a]).epsilon(1e-14));
  }
}

TEST_CASE("log-likelihood at zero is N ln(1/4) with all alternatives available") {
  const auto obs = five_parameter_data(1000, 3);
  const auto spec = five_parameter_spec();
  const auto data = ChoiceData::build(spec, obs);
  const auto draws = build_draws(data.n_individuals(), 50, 1);
  const SimulatedLikelihood ll(spec, data, draws);
  const std::vector<double> zero = {0, 0, 0, 0, 0};
  CHECK(ll.value(zero) == doctest::Approx(1000 * std::log(0.25)).epsilon(1e-13));
}

TEST_CASE("analytic gradient matches central differences") {
  const auto spec = five_parameter_spec();
  const auto obs = five_parameter_data(600, 4);
  const auto data = ChoiceData::build(spec, obs);
  const auto draws = build_draws(data.n_individuals(), 100, 1);
  const SimulatedLikelihood ll(spec, data, draws);
  for (const std::vector<double>& at : {std::vector<double>{0.1, 0.2, -0.4, 0.3, 0.8},
                                        std::vector<double>{1.0, -1.0, 0.5, -2.0, -1.2}}) {
    std::vector<double> g(5);
    ll.value_and_gradient(at, g);
    const auto fd = oracle::central_gradient([&](const std::vector<double>& p) { return ll.value(p); }, at, 1e-5);
    for (int k = 0; k < 5; ++k) {
      CAPTURE(k);
      REQUIRE(std::abs(fd[k]) > 1.0);
      CHECK(std::abs(g[k] - fd[k]) / std::abs(fd[k]) < 1e-6);
    }
  }
}

TEST_CASE("log-likelihood decomposes over a partition of the data") {
  const auto spec = five_parameter_spec();
  const auto obs = five_parameter_data(900, 5, 3);
  const auto data = ChoiceData::build(spec, obs);
  const auto draws = build_draws(data.n_individuals(), 40, 1);
  const std::vector<double> p = {0.2, -0.1, -0.5, -0.6, 1.1};
  const double whole = SimulatedLikelihood(spec, data, draws).value(p);
  std::vector<std::size_t> even, odd;
  for (std::size_t n = 0; n < data.size(); ++n) (n % 2 ? odd : even).push_back(n);
  const auto a = data.subset(even);
  const auto b = data.subset(odd);
  const double parts = SimulatedLikelihood(spec, a, draws).value(p) + SimulatedLikelihood(spec, b, draws).value(p);
  CHECK(std::abs(whole - parts) <= 1e-9);
}

TEST_CASE("zero sds give exactly the closed-form MNL log-likelihood") {
  const auto spec = five_parameter_spec();
  const auto obs = five_parameter_data(500, 6);
  const auto data = ChoiceData::build(spec, obs);
  const auto draws = build_draws(data.n_individuals(), 200, 1);
  const std::vector<double> p = {0.4, -0.2, -1.0, -0.7, 0.0};
  double closed = 0.0;
  for (std::size_t n = 0; n < obs.size(); ++n) {
    const auto pr = mnl_probabilities(utilities(spec, p, obs[n], std::vector<double>{0.0}), obs[n].available);
    closed += std::log(pr[index_of(obs[n].chosen)]);
  }
  const double simulated = SimulatedLikelihood(spec, data, draws).value(p);
  CHECK(simulated == doctest::Approx(closed).epsilon(1e-14));
}

TEST_CASE("value, gradient and scores are bit-identical across worker counts") {
  const auto spec = five_parameter_spec();
  const auto obs = five_parameter_data(3000, 8, 2);
  const auto data = ChoiceData::build(spec, obs);
  const auto draws = build_draws(data.n_individuals(), 30, 1);
  const std::vector<double> p = {0.3, -0.2, -0.9, -0.8, 1.2};
  std::vector<double> g1(5), g4(5);
  const double v1 = SimulatedLikelihood(spec, data, draws, 1).value_and_gradient(p, g1);
  const double v4 = SimulatedLikelihood(spec, data, draws, 4).value_and_gradient(p, g4);
  CHECK(std::memcmp(&v1, &v4, sizeof v1) == 0);
  CHECK(std::memcmp(g1.data(), g4.data(), sizeof(double) * 5) == 0);
  CHECK(v1 == SimulatedLikelihood(spec, data, draws, 1).value(p));

  const auto s = SimulatedLikelihood(spec, data, draws, 3).scores(p);
  REQUIRE(s.size() == data.size() * 5);
  for (int k = 0; k < 5; ++k) {
    double total = 0.0;
    for (std::size_t n = 0; n < data.size(); ++n) total += s[n * 5 + k];
    CHECK(total == doctest::Approx(g1[k]).epsilon(1e-10));
  }
}

TEST_CASE("weights scale each observation's contribution") {
  const auto spec = five_parameter_spec();
  auto obs = five_parameter_data(200, 9);
  const std::vector<double> p = {0.3, -0.2, -0.9, -0.8, 1.2};
  const auto data = ChoiceData::build(spec, obs);
  const auto draws = build_draws(data.n_individuals(), 20, 1);
  const double base = SimulatedLikelihood(spec, data, draws).value(p);
  for (auto& o : obs) o.weight = 2.5;
  const auto heavy = ChoiceData::build(spec, obs);
  CHECK(SimulatedLikelihood(spec, heavy, draws).value(p) == doctest::Approx(2.5 * base).epsilon(1e-13));
}

TEST_CASE("chosen probabilities are floored before the logarithm") {
  const ModelSpecification spec({constant("pv", A::PersonalVehicle)});
  const std::vector<ChoiceObservation> obs = {obs_with({}, A::Walk)};
  const auto data = ChoiceData::build(spec, obs);
  const auto draws = build_draws(1, 1, 0, 0);
  const SimulatedLikelihood ll(spec, data, draws);
  const std::vector<double> extreme = {1e6};
  CHECK(ll.value(extreme) == doctest::Approx(std::log(kProbabilityFloor)));
  CHECK(std::isfinite(ll.value(extreme)));
}

TEST_CASE("ChoiceData drops incomplete rows and rows missing a referenced covariate") {
  const ModelSpecification spec({fixed("w", "x", A::Walk)});
  std::vector<ChoiceObservation> obs = {obs_with({{"x", 1.0}}), obs_with({{"y", 1.0}}), obs_with({{"x", 2.0}})};
  obs[2].incomplete = true;
  obs[1].person_id = "q";
  const auto data = ChoiceData::build(spec, obs);
  CHECK(data.size() == 1);
  CHECK(data.dropped() == 2);
  CHECK(data.source(0) == 0);
  CHECK(data.row(0)[0] == 1.0);
}

TEST_CASE("draw schemes: per person shares a block, per trip does not") {
  const auto obs = five_parameter_data(12, 10, 3);
  const auto spec = five_parameter_spec();
  const auto per_person = ChoiceData::build(spec, obs, DrawScheme::PerPerson);
  const auto per_trip = ChoiceData::build(spec, obs, DrawScheme::PerTrip);
  CHECK(per_person.n_individuals() == 4);
  CHECK(per_trip.n_individuals() == 12);
  CHECK(per_person.individual(0) == per_person.individual(2));
  CHECK(per_person.individual(2) != per_person.individual(3));
  CHECK(per_trip.individual(0) != per_trip.individual(1));
}

TEST_CASE("ChoiceData and SimulatedLikelihood argument checks") {
  const auto spec = five_parameter_spec();
  auto bad = obs_with({{"x1", 1.0}, {"x2", 1.0}}, A::Walk, {true, true, false, true});
  CHECK_THROWS_AS(ChoiceData::build(spec, std::vector{bad}), InputError);

  const auto data = ChoiceData::build(spec, five_parameter_data(10, 1));
  CHECK_THROWS_AS(SimulatedLikelihood(spec, data, build_draws(10, 5, 2)), std::invalid_argument);
  CHECK_THROWS_AS(SimulatedLikelihood(spec, data, build_draws(3, 5, 1)), std::invalid_argument);
  CHECK_THROWS_AS(SimulatedLikelihood(spec, ChoiceData{}, build_draws(3, 5, 1)), std::invalid_argument);
  const SimulatedLikelihood ll(spec, data, build_draws(10, 5, 1));
  const std::vector<double> wrong = {1.0, 2.0};
  CHECK_THROWS_AS(ll.value(wrong), std::invalid_argument);
}
