#pragma once

#include <string>

#include "json.hpp"
#include "modechoice/effects.hpp"
#include "modechoice/estimate.hpp"

namespace modechoice {

inline constexpr int kResultSchemaVersion = 1;

/// Serializes everything needed to re-render the report and to rebuild the
/// estimation draws. The worker count is left out so the
/// document does not depend on it.
nlohmann::json to_json(const EstimationResult& result);

/// Options block of a result or run config. Every key is optional and
/// overrides `base`; unknown keys and invalid values raise InputError.
EstimationOptions options_from_json(const nlohmann::json& opts, EstimationOptions base = {});

/// Throws InputError when the document is not a result of a supported
/// schema_version or a required field is missing or mistyped.
EstimationResult result_from_json(const nlohmann::json& doc);

/// Coefficient table grouped by the alternative each term is defined for.
/// Random terms print as "mean (sd)" with parenthesized statistics; a
/// missing standard error renders as an em dash.
std::string render_estimation_table(const EstimationResult& result);

std::string render_coefficients_csv(const EstimationResult& result);

std::string render_effects_table(const MarginalEffectsTable& table);

std::string render_effects_csv(const MarginalEffectsTable& table);

/// 12345.678, 2 -> "12,345.68".
std::string format_grouped(double value, int decimals);

}  // namespace modechoice
