#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace modechoice {

inline constexpr std::size_t kMaxHaltonDimensions = 10;
inline constexpr std::size_t kDefaultHaltonSkip = 100;

/// The first kMaxHaltonDimensions primes, used as per-dimension Halton bases.
std::span<const std::uint32_t> halton_bases() noexcept;

/// Van der Corput digit reversal of `index` in `base`. Requires index >= 1 and
/// base >= 2 (std::invalid_argument otherwise); the result lies in (0, 1).
double radical_inverse(std::uint64_t index, std::uint32_t base);

/// Standard normal distribution function.
double normal_cdf(double z) noexcept;

/// Standard normal quantile (Wichura's AS241, about 1e-16 relative accuracy).
/// Throws std::invalid_argument unless 0 < u < 1.
double inverse_normal_cdf(double u);

/// Standard-normal Halton draws laid out [individual][draw][dimension].
/// Individual n (0-based) owns sequence indices skip + n*R + 1 .. skip + (n+1)*R.
class DrawMatrix {
 public:
  DrawMatrix() = default;

  std::size_t n_individuals() const noexcept { return n_individuals_; }
  std::size_t n_draws() const noexcept { return n_draws_; }
  std::size_t n_dims() const noexcept { return n_dims_; }
  std::size_t skip() const noexcept { return skip_; }
  std::span<const std::uint32_t> bases() const noexcept { return halton_bases().first(n_dims_); }

  /// The n_dims normals of draw r for one individual.
  std::span<const double> draw(std::size_t individual, std::size_t r) const noexcept {
    return {values_.data() + (individual * n_draws_ + r) * n_dims_, n_dims_};
  }
  /// All R x n_dims normals of one individual, draw-major.
  std::span<const double> individual(std::size_t n) const noexcept {
    return {values_.data() + n * n_draws_ * n_dims_, n_draws_ * n_dims_};
  }
  double at(std::size_t individual, std::size_t r, std::size_t dim) const noexcept {
    return values_[(individual * n_draws_ + r) * n_dims_ + dim];
  }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const DrawMatrix&, const DrawMatrix&) = default;

 private:
  friend DrawMatrix build_draws(std::size_t, std::size_t, std::size_t, std::size_t);

  std::size_t n_individuals_ = 0;
  std::size_t n_draws_ = 0;
  std::size_t n_dims_ = 0;
  std::size_t skip_ = 0;
  std::vector<double> values_;
};

/// Deterministic per-individual Halton blocks mapped through the normal
/// quantile. n_individuals and n_draws must be positive; n_dims may be zero
/// (a pure fixed-coefficient model) but not above kMaxHaltonDimensions.
DrawMatrix build_draws(std::size_t n_individuals, std::size_t n_draws, std::size_t n_dims,
                       std::size_t skip = kDefaultHaltonSkip);

/// Audit dump: individual,draw,dim,base,value.
void write_draws_csv(std::ostream& out, const DrawMatrix& draws);

}  // namespace modechoice
