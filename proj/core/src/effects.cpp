#include "modechoice/effects.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

#include "modechoice/errors.hpp"
#include "modechoice/parallel.hpp"

namespace modechoice {
namespace {

constexpr std::size_t kBlockSize = 128;

bool is_binary_column(const ChoiceData& data, std::size_t t) {
  for (std::size_t n = 0; n < data.size(); ++n) {
    const double v = data.row(n)[t];
    if (v != 0.0 && v != 1.0) return false;
  }
  return true;
}

// Average over draws of dP/dx_t for every alternative.
PerAlternative derivative(const UtilityModel& model, std::size_t t, std::span<const double> x,
                          const AvailabilityMask& available, std::span<const double> draws,
                          std::size_t n_draws, std::size_t n_dims) {
  const std::size_t own = index_of(model.spec().terms()[t].alternative);
  const std::size_t reps = model.has_active_random() ? n_draws : 1;
  const std::vector<double> zeros(n_dims, 0.0);
  PerAlternative acc{};
  for (std::size_t r = 0; r < reps; ++r) {
    const auto z = model.has_active_random() ? draws.subspan(r * n_dims, n_dims)
                                             : std::span<const double>(zeros);
    const auto p = mnl_probabilities(model.utilities(x, available, z), available);
    const double beta = model.coefficient(t, z);
    for (std::size_t a = 0; a < kNumAlternatives; ++a) {
      acc[a] += p[a] * beta * ((a == own ? 1.0 : 0.0) - p[own]);
    }
  }
  for (auto& a : acc) a /= static_cast<double>(reps);
  return acc;
}

}  // namespace

MarginalEffectsTable marginal_effects(const EstimationResult& result, const ChoiceData& data,
                                      const DrawMatrix& draws, std::span<const std::string> terms,
                                      unsigned workers) {
  const ModelSpecification& spec = result.spec;
  if (data.empty()) throw std::invalid_argument("marginal_effects: no observations");
  if (draws.n_dims() != spec.n_random() || draws.n_individuals() < data.n_individuals()) {
    throw std::invalid_argument("marginal_effects: draw matrix does not match the sample");
  }

  std::vector<std::size_t> selected;
  if (terms.empty()) {
    for (std::size_t t = 0; t < spec.terms().size(); ++t) {
      if (!spec.terms()[t].is_constant()) selected.push_back(t);
    }
  } else {
    for (const auto& name : terms) {
      const auto t = spec.find(name);
      if (!t) throw std::invalid_argument(fmt::format("marginal_effects: unknown term '{}'", name));
      selected.push_back(*t);
    }
  }

  const UtilityModel model(spec, result.raw_parameters);
  double total_weight = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) total_weight += data.weight(n);

  MarginalEffectsTable table;
  for (std::size_t t : selected) {
    MarginalEffectsRow row;
    row.term = spec.terms()[t].name;
    row.defined_for = spec.terms()[t].alternative;
    row.discrete = !spec.terms()[t].is_constant() && is_binary_column(data, t);

    const std::size_t blocks = block_count(data.size(), kBlockSize);
    std::vector<PerAlternative> partial(blocks, PerAlternative{});
    parallel_blocks(data.size(), kBlockSize, workers,
                    [&](std::size_t b, std::size_t begin, std::size_t end) {
      std::vector<double> x;
      PerAlternative sum{};
      for (std::size_t n = begin; n < end; ++n) {
        const auto base = data.row(n);
        x.assign(base.begin(), base.end());
        const auto ind = draws.individual(data.individual(n));
        PerAlternative effect;
        if (row.discrete) {
          x[t] = 1.0;
          const auto p1 = model.simulated_probabilities(x, data.available(n), ind, draws.n_draws());
          x[t] = 0.0;
          const auto p0 = model.simulated_probabilities(x, data.available(n), ind, draws.n_draws());
          for (std::size_t a = 0; a < kNumAlternatives; ++a) effect[a] = p1[a] - p0[a];
        } else {
          effect = derivative(model, t, x, data.available(n), ind, draws.n_draws(), draws.n_dims());
        }
        for (std::size_t a = 0; a < kNumAlternatives; ++a) sum[a] += data.weight(n) * effect[a];
      }
      partial[b] = sum;
    });
    for (const auto& s : partial) {
      for (std::size_t a = 0; a < kNumAlternatives; ++a) row.effects[a] += s[a];
    }
    for (auto& e : row.effects) e /= total_weight;
    table.rows.push_back(row);
  }
  return table;
}

MarginalEffectsTable marginal_effects(const EstimationResult& result,
                                      std::span<const ChoiceObservation> observations,
                                      std::span<const std::string> terms) {
  const auto& opts = result.options;
  const auto data = ChoiceData::build(result.spec, observations, opts.draw_scheme);
  if (data.empty()) throw EstimationError("no complete observations for marginal effects");
  const auto draws = build_draws(data.n_individuals(), opts.draws, result.spec.n_random(), opts.skip);
  return marginal_effects(result, data, draws, terms, opts.workers);
}

double share_below_zero(double mean, double sd) {
  if (!(sd > 0.0)) throw std::invalid_argument("share_below_zero: sd must be positive");
  return normal_cdf(-mean / sd);
}

}  // namespace modechoice
