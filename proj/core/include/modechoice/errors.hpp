#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace modechoice {

/// Malformed or inconsistent input data. Carries the 1-based data row (header
/// excluded) when the problem is tied to one row.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what, std::optional<std::size_t> row = std::nullopt)
      : std::runtime_error(row ? "row " + std::to_string(*row) + ": " + what : what), row_(row) {}

  std::optional<std::size_t> row() const noexcept { return row_; }

 private:
  std::optional<std::size_t> row_;
};

/// Invalid model specification document.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure during estimation (non-finite objective, etc.).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace modechoice
