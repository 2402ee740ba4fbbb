#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "modechoice/alternative.hpp"

namespace modechoice {

/// Covariate name that marks an alternative-specific constant.
inline constexpr std::string_view kConstant = "CONSTANT";

enum class TermKind { Fixed, RandomNormal };

std::string_view to_string(TermKind kind) noexcept;

/// One coefficient entering one alternative's utility. A RandomNormal term
/// carries a (mean, sd) pair; its coefficient for draw z is mean + |sd| * z.
struct Term {
  std::string name;
  std::string covariate;
  Alternative alternative = Alternative::PersonalVehicle;
  TermKind kind = TermKind::Fixed;

  bool is_constant() const noexcept { return covariate == kConstant; }
  bool is_random() const noexcept { return kind == TermKind::RandomNormal; }

  friend bool operator==(const Term&, const Term&) = default;
};

enum class ParameterRole { Coefficient, Mean, StdDev };

/// Flat parameter vector layout: terms in order, one slot for a Fixed term,
/// two consecutive slots (mean, sd) for a RandomNormal term.
struct ParameterSlot {
  std::size_t term = 0;
  ParameterRole role = ParameterRole::Coefficient;
  /// "name" for coefficients and means, "name.sd" for standard deviations.
  std::string label;
};

class ModelSpecification {
 public:
  ModelSpecification() = default;

  /// Throws SpecError on duplicate term names, a constant on the reference
  /// alternative, a duplicated constant, or an empty name/covariate.
  explicit ModelSpecification(std::vector<Term> terms,
                              Alternative reference = Alternative::OtherMode);

  const std::vector<Term>& terms() const noexcept { return terms_; }
  Alternative reference() const noexcept { return reference_; }

  std::size_t n_parameters() const noexcept { return slots_.size(); }
  std::size_t n_random() const noexcept { return n_random_; }
  const std::vector<ParameterSlot>& slots() const noexcept { return slots_; }

  /// First parameter slot of term t (the mean for a random term).
  std::size_t offset(std::size_t t) const noexcept { return offsets_[t]; }
  /// Draw dimension of a random term, in term order.
  std::optional<std::size_t> random_dim(std::size_t t) const noexcept;

  std::optional<std::size_t> find(std::string_view term_name) const noexcept;

  /// Distinct non-constant covariates, first-use order.
  std::vector<std::string> covariates() const;

  ModelSpecification without(std::size_t t) const;
  ModelSpecification with_kind(std::size_t t, TermKind kind) const;

  /// Default starting values: 0 for coefficients and means, 0.1 for sds.
  std::vector<double> default_start() const;

  nlohmann::json to_json() const;
  /// Throws SpecError describing the first problem found.
  static ModelSpecification from_json(const nlohmann::json& doc);

  friend bool operator==(const ModelSpecification& a, const ModelSpecification& b) {
    return a.terms_ == b.terms_ && a.reference_ == b.reference_;
  }

 private:
  std::vector<Term> terms_;
  Alternative reference_ = Alternative::OtherMode;
  std::vector<ParameterSlot> slots_;
  std::vector<std::size_t> offsets_;
  std::vector<std::optional<std::size_t>> random_dims_;
  std::size_t n_random_ = 0;
};

/// Parses a JSON specification document; syntax errors report the byte
/// offset at which parsing failed.
ModelSpecification parse_model_spec(std::string_view text);

inline constexpr int kSpecSchemaVersion = 1;

}  // namespace modechoice
