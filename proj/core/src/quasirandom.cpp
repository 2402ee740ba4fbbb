#include "modechoice/quasirandom.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace modechoice {
namespace {

constexpr std::array<std::uint32_t, kMaxHaltonDimensions> kPrimes = {2,  3,  5,  7,  11,
                                                                     13, 17, 19, 23, 29};

double poly(std::span<const double> c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

// Coefficients of Wichura (1988), Algorithm AS 241 (PPND16).
constexpr std::array<double, 8> kCentralNum = {
    3.387132872796366608,   133.14166789178437745, 1971.5909503065514427,
    13731.693765509461125,  45921.953931549871457, 67265.770927008700853,
    33430.575583588128105,  2509.0809287301226727};
constexpr std::array<double, 8> kCentralDen = {
    1.0,                   42.313330701600911252, 687.18700749205790830,
    5394.1960214247511077, 21213.794301586595867, 39307.895800092710610,
    28729.085735721942674, 5226.4952788528544610};
constexpr std::array<double, 8> kNearNum = {
    1.42343711074968357734,  4.63033784615654529590,  5.76949722146069140550,
    3.64784832476320460504,  1.27045825245236838258,  0.241780725177450611770,
    0.0227238449892691845833, 7.74545014278341407640e-4};
constexpr std::array<double, 8> kNearDen = {
    1.0,                      2.05319162663775882187,   1.67638483018380384940,
    0.689767334985100004550,  0.148103976427480074590,  0.0151986665636164571966,
    5.47593808499534494600e-4, 1.05075007164441684324e-9};
constexpr std::array<double, 8> kTailNum = {
    6.65790464350110377720,   5.46378491116411436990,   1.78482653991729133580,
    0.296560571828504891230,  0.0265321895265761230930, 0.00124266094738807843860,
    2.71155556874348757815e-5, 2.01033439929228813265e-7};
constexpr std::array<double, 8> kTailDen = {
    1.0,                       0.599832206555887937690,  0.136929880922735805310,
    0.0148753612908506148525,  7.86869131145613259100e-4, 1.84631831751005468180e-5,
    1.42151175831644588870e-7, 2.04426310338993978564e-15};

}  // namespace

std::span<const std::uint32_t> halton_bases() noexcept { return kPrimes; }

double radical_inverse(std::uint64_t index, std::uint32_t base) {
  if (index == 0) throw std::invalid_argument("radical_inverse: index must be >= 1");
  if (base < 2) throw std::invalid_argument("radical_inverse: base must be >= 2");
  const double inv_base = 1.0 / base;
  double scale = inv_base;
  double result = 0.0;
  while (index > 0) {
    result += static_cast<double>(index % base) * scale;
    index /= base;
    scale *= inv_base;
  }
  return result;
}

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double inverse_normal_cdf(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::invalid_argument(fmt::format("inverse_normal_cdf: {} is outside (0, 1)", u));
  }
  const double q = u - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly(kCentralNum, r) / poly(kCentralDen, r);
  }
  double r = q < 0.0 ? u : 1.0 - u;
  r = std::sqrt(-std::log(r));
  double z;
  if (r <= 5.0) {
    r -= 1.6;
    z = poly(kNearNum, r) / poly(kNearDen, r);
  } else {
    r -= 5.0;
    z = poly(kTailNum, r) / poly(kTailDen, r);
  }
  return q < 0.0 ? -z : z;
}

DrawMatrix build_draws(std::size_t n_individuals, std::size_t n_draws, std::size_t n_dims,
                       std::size_t skip) {
  if (n_individuals == 0) throw std::invalid_argument("build_draws: no individuals");
  if (n_draws == 0) throw std::invalid_argument("build_draws: draw count must be positive");
  if (n_dims > kMaxHaltonDimensions) {
    throw std::invalid_argument(fmt::format(
        "build_draws: {} random dimensions requested; at most {} are supported", n_dims,
        kMaxHaltonDimensions));
  }
  DrawMatrix m;
  m.n_individuals_ = n_individuals;
  m.n_draws_ = n_draws;
  m.n_dims_ = n_dims;
  m.skip_ = skip;
  m.values_.resize(n_individuals * n_draws * n_dims);
  for (std::size_t d = 0; d < n_dims; ++d) {
    const std::uint32_t base = kPrimes[d];
    for (std::size_t n = 0; n < n_individuals; ++n) {
      for (std::size_t r = 0; r < n_draws; ++r) {
        const std::uint64_t seq = skip + n * n_draws + r + 1;
        m.values_[(n * n_draws + r) * n_dims + d] = inverse_normal_cdf(radical_inverse(seq, base));
      }
    }
  }
  return m;
}

void write_draws_csv(std::ostream& out, const DrawMatrix& draws) {
  out << "individual,draw,dim,base,value\n";
  for (std::size_t n = 0; n < draws.n_individuals(); ++n) {
    for (std::size_t r = 0; r < draws.n_draws(); ++r) {
      for (std::size_t d = 0; d < draws.n_dims(); ++d) {
        out << fmt::format("{},{},{},{},{}\n", n, r, d, draws.bases()[d], draws.at(n, r, d));
      }
    }
  }
}

}  // namespace modechoice
