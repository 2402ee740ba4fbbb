#include "modechoice/likelihood.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

#include "modechoice/errors.hpp"
#include "modechoice/parallel.hpp"

namespace modechoice {
namespace {

constexpr std::size_t kBlockSize = 256;

// Softmax over available alternatives. Returns false when none is available.
bool softmax(const Utilities& v, const AvailabilityMask& available, Probabilities& p) noexcept {
  double max_v = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t a = 0; a < kNumAlternatives; ++a) {
    if (available[a]) {
      max_v = any ? std::max(max_v, v[a]) : v[a];
      any = true;
    }
  }
  if (!any) return false;
  double sum = 0.0;
  for (std::size_t a = 0; a < kNumAlternatives; ++a) {
    p[a] = available[a] ? std::exp(v[a] - max_v) : 0.0;
    sum += p[a];
  }
  const double inv = 1.0 / sum;
  for (auto& pa : p) pa *= inv;
  return true;
}

struct TermInfo {
  std::size_t alt;
  std::size_t offset;
  std::size_t dim;  // draw dimension, random terms only
  bool random;
  double mean;
  double abs_sd;
  double sd_sign;
};

// Specification compiled against one parameter vector.
struct Kernel {
  std::vector<TermInfo> terms;
  std::vector<std::size_t> active;  // random terms with nonzero sd
  std::size_t n_params;

  Kernel(const ModelSpecification& spec, std::span<const double> params)
      : n_params(spec.n_parameters()) {
    if (params.size() != n_params) {
      throw std::invalid_argument(fmt::format("expected {} parameters, got {}", n_params,
                                              params.size()));
    }
    for (double p : params) {
      if (!std::isfinite(p)) throw std::invalid_argument("non-finite parameter value");
    }
    const auto& ts = spec.terms();
    terms.reserve(ts.size());
    for (std::size_t t = 0; t < ts.size(); ++t) {
      TermInfo info{};
      info.alt = index_of(ts[t].alternative);
      info.offset = spec.offset(t);
      info.random = ts[t].is_random();
      info.mean = params[info.offset];
      if (info.random) {
        info.dim = *spec.random_dim(t);
        const double sd = params[info.offset + 1];
        info.abs_sd = std::abs(sd);
        info.sd_sign = sd > 0.0 ? 1.0 : (sd < 0.0 ? -1.0 : 0.0);
        if (info.abs_sd > 0.0) active.push_back(t);
      }
      terms.push_back(info);
    }
  }

  // Weighted-free ln P_n for one observation. When grad is non-null the
  // gradient of ln max(P_n, floor) (unweighted) is accumulated into it with
  // the given scale. prob_out receives the simulated chosen probability.
  double evaluate(std::span<const double> x, std::size_t chosen, const AvailabilityMask& available,
                  std::span<const double> draws, std::size_t n_draws, std::size_t n_dims,
                  double* grad, double scale, double* prob_out = nullptr) const {
    Utilities base{};
    for (std::size_t t = 0; t < terms.size(); ++t) base[terms[t].alt] += terms[t].mean * x[t];

    const std::size_t n_active = active.size();
    const std::size_t reps = n_active == 0 ? 1 : n_draws;
    std::array<double, kMaxHaltonDimensions> acc_z{};
    std::array<double, kMaxHaltonDimensions> acc_zp{};
    Probabilities acc_p{};
    double sum_pc = 0.0;

    Utilities v;
    Probabilities p;
    for (std::size_t r = 0; r < reps; ++r) {
      v = base;
      const double* z = n_active ? draws.data() + r * n_dims : nullptr;
      for (std::size_t i = 0; i < n_active; ++i) {
        const TermInfo& ti = terms[active[i]];
        v[ti.alt] += ti.abs_sd * z[ti.dim] * x[active[i]];
      }
      softmax(v, available, p);
      const double pc = p[chosen];
      sum_pc += pc;
      if (grad) {
        for (std::size_t a = 0; a < kNumAlternatives; ++a) acc_p[a] += pc * p[a];
        for (std::size_t i = 0; i < n_active; ++i) {
          const TermInfo& ti = terms[active[i]];
          const double wz = pc * z[ti.dim];
          acc_z[i] += wz;
          acc_zp[i] += wz * p[ti.alt];
        }
      }
    }

    const double prob = sum_pc / static_cast<double>(reps);
    if (prob_out) *prob_out = prob;
    if (grad && sum_pc > 0.0) {
      const double inv = 1.0 / sum_pc;
      for (std::size_t t = 0; t < terms.size(); ++t) {
        const TermInfo& ti = terms[t];
        const double own = ti.alt == chosen ? 1.0 : 0.0;
        grad[ti.offset] += scale * x[t] * (own - acc_p[ti.alt] * inv);
      }
      for (std::size_t i = 0; i < n_active; ++i) {
        const TermInfo& ti = terms[active[i]];
        const double own = ti.alt == chosen ? acc_z[i] : 0.0;
        grad[ti.offset + 1] += scale * ti.sd_sign * x[active[i]] * (own - acc_zp[i]) * inv;
      }
    }
    return std::log(std::max(prob, kProbabilityFloor));
  }
};

}  // namespace

std::string_view to_string(DrawScheme scheme) noexcept {
  return scheme == DrawScheme::PerPerson ? "per_person" : "per_trip";
}

// ---------------------------------------------------------------------------

ChoiceData ChoiceData::build(const ModelSpecification& spec,
                             std::span<const ChoiceObservation> observations,
                             DrawScheme scheme) {
  ChoiceData d;
  const auto& terms = spec.terms();
  d.n_terms_ = terms.size();
  std::unordered_map<std::string, std::size_t> person_index;
  std::vector<double> row(d.n_terms_);

  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& obs = observations[i];
    validate(obs);
    bool complete = !obs.incomplete;
    for (std::size_t t = 0; complete && t < terms.size(); ++t) {
      if (terms[t].is_constant()) {
        row[t] = 1.0;
      } else if (auto v = obs.covariate(terms[t].covariate)) {
        row[t] = *v;
      } else {
        complete = false;
      }
    }
    if (!complete) {
      ++d.dropped_;
      continue;
    }
    d.x_.insert(d.x_.end(), row.begin(), row.end());
    d.chosen_.push_back(obs.chosen);
    d.available_.push_back(obs.available);
    d.weight_.push_back(obs.weight);
    d.source_.push_back(i);
    if (scheme == DrawScheme::PerTrip) {
      d.individual_.push_back(d.n_individuals_++);
    } else {
      auto [it, inserted] = person_index.try_emplace(obs.person_id, d.n_individuals_);
      if (inserted) ++d.n_individuals_;
      d.individual_.push_back(it->second);
    }
  }
  return d;
}

ChoiceData ChoiceData::subset(std::span<const std::size_t> rows) const {
  ChoiceData d;
  d.n_terms_ = n_terms_;
  d.n_individuals_ = n_individuals_;
  for (std::size_t n : rows) {
    if (n >= size()) throw std::out_of_range("ChoiceData::subset: row out of range");
    auto r = row(n);
    d.x_.insert(d.x_.end(), r.begin(), r.end());
    d.chosen_.push_back(chosen_[n]);
    d.available_.push_back(available_[n]);
    d.weight_.push_back(weight_[n]);
    d.individual_.push_back(individual_[n]);
    d.source_.push_back(source_[n]);
  }
  return d;
}

std::vector<double> covariate_row(const ModelSpecification& spec, const ChoiceObservation& obs) {
  std::vector<double> row;
  row.reserve(spec.terms().size());
  for (const auto& term : spec.terms()) {
    if (term.is_constant()) {
      row.push_back(1.0);
    } else if (auto v = obs.covariate(term.covariate)) {
      row.push_back(*v);
    } else {
      throw InputError(fmt::format("observation '{}': covariate '{}' of term '{}' is missing",
                                   obs.obs_id, term.covariate, term.name));
    }
  }
  return row;
}

// ---------------------------------------------------------------------------

UtilityModel::UtilityModel(const ModelSpecification& spec, std::span<const double> params)
    : spec_(&spec) {
  const Kernel k(spec, params);
  for (const auto& ti : k.terms) {
    mean_.push_back(ti.mean);
    abs_sd_.push_back(ti.random ? ti.abs_sd : 0.0);
  }
  active_random_ = !k.active.empty();
}

double UtilityModel::coefficient(std::size_t t, std::span<const double> draw) const noexcept {
  const auto dim = spec_->random_dim(t);
  return dim ? mean_[t] + abs_sd_[t] * draw[*dim] : mean_[t];
}

Utilities UtilityModel::utilities(std::span<const double> x, const AvailabilityMask& available,
                                  std::span<const double> draw) const noexcept {
  Utilities v{};
  const auto& terms = spec_->terms();
  for (std::size_t t = 0; t < terms.size(); ++t) {
    v[index_of(terms[t].alternative)] += coefficient(t, draw) * x[t];
  }
  for (std::size_t a = 0; a < kNumAlternatives; ++a) {
    if (!available[a]) v[a] = -std::numeric_limits<double>::infinity();
  }
  return v;
}

Probabilities UtilityModel::simulated_probabilities(std::span<const double> x,
                                                    const AvailabilityMask& available,
                                                    std::span<const double> individual_draws,
                                                    std::size_t n_draws) const {
  const std::size_t dims = spec_->n_random();
  if (!active_random_) {
    const std::vector<double> zeros(dims, 0.0);
    return mnl_probabilities(utilities(x, available, zeros), available);
  }
  if (individual_draws.size() < n_draws * dims) {
    throw std::invalid_argument("simulated_probabilities: draw block too small");
  }
  Probabilities acc{};
  for (std::size_t r = 0; r < n_draws; ++r) {
    const auto p = mnl_probabilities(
        utilities(x, available, individual_draws.subspan(r * dims, dims)), available);
    for (std::size_t a = 0; a < kNumAlternatives; ++a) acc[a] += p[a];
  }
  for (auto& a : acc) a /= static_cast<double>(n_draws);
  return acc;
}

Probabilities mnl_probabilities(const Utilities& utilities, const AvailabilityMask& available) {
  Probabilities p{};
  if (!softmax(utilities, available, p)) {
    throw std::invalid_argument("mnl_probabilities: no alternative is available");
  }
  return p;
}

Utilities utilities(const ModelSpecification& spec, std::span<const double> params,
                    const ChoiceObservation& obs, std::span<const double> draw) {
  if (draw.size() < spec.n_random()) {
    throw std::invalid_argument("utilities: draw has fewer dimensions than random terms");
  }
  const UtilityModel model(spec, params);
  return model.utilities(covariate_row(spec, obs), obs.available, draw);
}

double simulated_probability(const ModelSpecification& spec, std::span<const double> params,
                             const ChoiceObservation& obs, const DrawMatrix& draws,
                             std::size_t individual) {
  if (draws.n_dims() != spec.n_random()) {
    throw std::invalid_argument(fmt::format(
        "simulated_probability: draw matrix has {} dimensions, specification has {} random terms",
        draws.n_dims(), spec.n_random()));
  }
  if (individual >= draws.n_individuals()) {
    throw std::out_of_range("simulated_probability: individual outside the draw matrix");
  }
  const Kernel k(spec, params);
  const auto x = covariate_row(spec, obs);
  double prob = 0.0;
  k.evaluate(x, index_of(obs.chosen), obs.available, draws.individual(individual),
             draws.n_draws(), draws.n_dims(), nullptr, 0.0, &prob);
  return prob;
}

// ---------------------------------------------------------------------------

SimulatedLikelihood::SimulatedLikelihood(const ModelSpecification& spec, const ChoiceData& data,
                                         const DrawMatrix& draws, unsigned workers)
    : spec_(&spec), data_(&data), draws_(&draws), workers_(std::max(workers, 1u)) {
  if (data.empty()) throw std::invalid_argument("simulated log-likelihood: no observations");
  if (data.n_terms() != spec.terms().size()) {
    throw std::invalid_argument("simulated log-likelihood: data built for another specification");
  }
  if (draws.n_dims() != spec.n_random()) {
    throw std::invalid_argument(fmt::format(
        "simulated log-likelihood: draw matrix has {} dimensions, specification has {} random "
        "terms",
        draws.n_dims(), spec.n_random()));
  }
  if (draws.n_individuals() < data.n_individuals()) {
    throw std::invalid_argument(fmt::format(
        "simulated log-likelihood: draw matrix covers {} individuals, data has {}",
        draws.n_individuals(), data.n_individuals()));
  }
}

double SimulatedLikelihood::value(std::span<const double> params) const {
  const Kernel k(*spec_, params);
  const auto& d = *data_;
  const auto& dm = *draws_;
  std::vector<double> partial(block_count(d.size(), kBlockSize), 0.0);
  parallel_blocks(d.size(), kBlockSize, workers_, [&](std::size_t b, std::size_t begin, std::size_t end) {
    double sum = 0.0;
    for (std::size_t n = begin; n < end; ++n) {
      sum += d.weight(n) * k.evaluate(d.row(n), index_of(d.chosen(n)), d.available(n),
                                      dm.individual(d.individual(n)), dm.n_draws(), dm.n_dims(),
                                      nullptr, 0.0);
    }
    partial[b] = sum;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

double SimulatedLikelihood::value_and_gradient(std::span<const double> params,
                                               std::span<double> gradient) const {
  const Kernel k(*spec_, params);
  const std::size_t np = k.n_params;
  if (gradient.size() != np) throw std::invalid_argument("gradient buffer has the wrong size");
  const auto& d = *data_;
  const auto& dm = *draws_;
  const std::size_t blocks = block_count(d.size(), kBlockSize);
  std::vector<double> partial(blocks, 0.0);
  std::vector<double> partial_grad(blocks * np, 0.0);
  parallel_blocks(d.size(), kBlockSize, workers_, [&](std::size_t b, std::size_t begin, std::size_t end) {
    double sum = 0.0;
    double* g = partial_grad.data() + b * np;
    for (std::size_t n = begin; n < end; ++n) {
      sum += d.weight(n) * k.evaluate(d.row(n), index_of(d.chosen(n)), d.available(n),
                                      dm.individual(d.individual(n)), dm.n_draws(), dm.n_dims(),
                                      g, d.weight(n));
    }
    partial[b] = sum;
  });
  std::fill(gradient.begin(), gradient.end(), 0.0);
  double total = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    total += partial[b];
    for (std::size_t j = 0; j < np; ++j) gradient[j] += partial_grad[b * np + j];
  }
  return total;
}

std::vector<double> SimulatedLikelihood::scores(std::span<const double> params) const {
  const Kernel k(*spec_, params);
  const std::size_t np = k.n_params;
  const auto& d = *data_;
  const auto& dm = *draws_;
  std::vector<double> out(d.size() * np, 0.0);
  parallel_blocks(d.size(), kBlockSize, workers_, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      k.evaluate(d.row(n), index_of(d.chosen(n)), d.available(n), dm.individual(d.individual(n)),
                 dm.n_draws(), dm.n_dims(), out.data() + n * np, d.weight(n));
    }
  });
  return out;
}

std::vector<double> SimulatedLikelihood::chosen_probabilities(std::span<const double> params) const {
  const Kernel k(*spec_, params);
  const auto& d = *data_;
  const auto& dm = *draws_;
  std::vector<double> out(d.size(), 0.0);
  parallel_blocks(d.size(), kBlockSize, workers_, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      k.evaluate(d.row(n), index_of(d.chosen(n)), d.available(n), dm.individual(d.individual(n)),
                 dm.n_draws(), dm.n_dims(), nullptr, 0.0, &out[n]);
    }
  });
  return out;
}

}  // namespace modechoice
