#include <benchmark/benchmark.h>

#include <vector>

#include "modechoice/likelihood.hpp"
#include "modechoice/quasirandom.hpp"
#include "modechoice/simulate.hpp"

using namespace modechoice;

namespace {

struct Problem {
  ModelSpecification spec;
  std::vector<double> params;
  ChoiceData data;
  DrawMatrix draws;
};

/// Survey-sized model: 4 fixed covariates, 2 random, 3 constants.
Problem make_problem(std::size_t n, std::size_t r) {
  using A = Alternative;
  const std::string c(kConstant);
  ChoiceSimulation sim;
  sim.spec = ModelSpecification({{"pv", c, A::PersonalVehicle, TermKind::Fixed},
                                 {"pt", c, A::PublicTransport, TermKind::Fixed},
                                 {"walk", c, A::Walk, TermKind::Fixed},
                                 {"pv_a", "a", A::PersonalVehicle, TermKind::Fixed},
                                 {"pt_b", "b", A::PublicTransport, TermKind::Fixed},
                                 {"walk_len", "len", A::Walk, TermKind::RandomNormal},
                                 {"oth_d", "d", A::OtherMode, TermKind::RandomNormal}});
  sim.true_parameters = {0.8, -0.3, 0.2, 0.9, 0.6, -1.2, 0.7, -1.5, 2.0};
  sim.covariates["len"] = {CovariateDistribution::Kind::Normal, 1.0, 1.0};
  sim.n_observations = n;
  sim.seed = 1;
  Problem p{sim.spec, sim.true_parameters, ChoiceData::build(sim.spec, simulate_choices(sim)), {}};
  p.draws = build_draws(p.data.n_individuals(), r, sim.spec.n_random());
  return p;
}

void BM_LogLikelihood(benchmark::State& state) {
  const auto p = make_problem(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const SimulatedLikelihood ll(p.spec, p.data, p.draws);
  for (auto _ : state) benchmark::DoNotOptimize(ll.value(p.params));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_LogLikelihood)->Args({1000, 200})->Args({8000, 200})->Unit(benchmark::kMillisecond);

void BM_LogLikelihoodGradient(benchmark::State& state) {
  const auto p = make_problem(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const SimulatedLikelihood ll(p.spec, p.data, p.draws);
  std::vector<double> g(p.params.size());
  for (auto _ : state) benchmark::DoNotOptimize(ll.value_and_gradient(p.params, g));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_LogLikelihoodGradient)->Args({1000, 200})->Args({8000, 200})->Unit(benchmark::kMillisecond);

void BM_BuildDraws(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_draws(static_cast<std::size_t>(state.range(0)), 200, 2));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 200 * 2);
}
BENCHMARK(BM_BuildDraws)->Arg(1000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_InverseNormalCdf(benchmark::State& state) {
  std::vector<double> u(4096);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(u.size());
  for (auto _ : state) {
    double acc = 0.0;
    for (double x : u) acc += inverse_normal_cdf(x);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(u.size()));
}
BENCHMARK(BM_InverseNormalCdf);

}  // namespace

BENCHMARK_MAIN();
