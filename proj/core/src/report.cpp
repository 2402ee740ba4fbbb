#include "modechoice/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "modechoice/csv.hpp"
#include "modechoice/errors.hpp"

namespace modechoice {
namespace {

using nlohmann::json;

constexpr std::string_view kMissing = "—";

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string_view role_name(ParameterRole r) {
  switch (r) {
    case ParameterRole::Coefficient: return "coefficient";
    case ParameterRole::Mean: return "mean";
    case ParameterRole::StdDev: return "sd";
  }
  return "coefficient";
}

template <class T>
T field(const json& obj, const char* key, const char* where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw InputError(fmt::format("{}: missing field '{}'", where, key));
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw InputError(fmt::format("{}: field '{}' has the wrong type", where, key));
  }
}

std::optional<double> optional_field(const json& obj, const char* key, const char* where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw InputError(fmt::format("{}: missing field '{}'", where, key));
  if (it->is_null()) return std::nullopt;
  if (!it->is_number()) throw InputError(fmt::format("{}: field '{}' must be a number", where, key));
  return it->get<double>();
}

std::string fixed(const std::optional<double>& v, int decimals) {
  return v ? fmt::format("{:.{}f}", *v, decimals) : std::string(kMissing);
}

std::string pad_right(std::string_view s, std::size_t width) {
  // Width counts code points so the em dash aligns like one character.
  std::size_t cps = 0;
  for (unsigned char c : s) cps += (c & 0xC0) != 0x80;
  std::string out(s);
  if (cps < width) out.append(width - cps, ' ');
  return out;
}

struct TableRow {
  std::string label;
  std::vector<std::string> cells;
};

std::string layout(const std::vector<std::string>& header, const std::vector<TableRow>& rows) {
  std::vector<std::size_t> widths(header.size(), 0);
  const auto measure = [&](std::size_t col, std::string_view s) {
    std::size_t cps = 0;
    for (unsigned char c : s) cps += (c & 0xC0) != 0x80;
    widths[col] = std::max(widths[col], cps);
  };
  for (std::size_t c = 0; c < header.size(); ++c) measure(c, header[c]);
  for (const auto& row : rows) {
    if (row.cells.empty()) continue;
    measure(0, "  " + row.label);
    for (std::size_t c = 0; c < row.cells.size(); ++c) measure(c + 1, row.cells[c]);
  }
  std::string out;
  const auto emit = [&](const std::vector<std::string>& cols) {
    std::string line;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      line += c + 1 == cols.size() ? cols[c] : pad_right(cols[c], widths[c] + 3);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  };
  emit(header);
  for (const auto& row : rows) {
    if (row.cells.empty()) {
      out += row.label + "\n";
      continue;
    }
    std::vector<std::string> cols{"  " + row.label};
    cols.insert(cols.end(), row.cells.begin(), row.cells.end());
    emit(cols);
  }
  return out;
}

}  // namespace

std::string format_grouped(double value, int decimals) {
  std::string digits = fmt::format("{:.{}f}", std::abs(value), decimals);
  const auto dot = digits.find('.');
  std::string int_part = digits.substr(0, dot);
  const std::string frac = dot == std::string::npos ? "" : digits.substr(dot);
  std::string grouped;
  for (std::size_t i = 0; i < int_part.size(); ++i) {
    if (i && (int_part.size() - i) % 3 == 0) grouped.push_back(',');
    grouped.push_back(int_part[i]);
  }
  const bool negative = value < 0.0 && std::stod(digits) != 0.0;
  return (negative ? "-" : "") + grouped + frac;
}

json to_json(const EstimationResult& r) {
  json doc;
  doc["schema_version"] = kResultSchemaVersion;
  doc["kind"] = "estimation_result";
  doc["specification"] = r.spec.to_json();
  json opts = {{"draws", r.options.draws},
               {"skip", r.options.skip},
               {"max_iterations", r.options.max_iterations},
               {"gradient_tolerance", r.options.gradient_tolerance},
               {"hessian", std::string(to_string(r.options.hessian))},
               {"draw_scheme", std::string(to_string(r.options.draw_scheme))},
               {"mnl_warm_start", r.options.mnl_warm_start}};
  if (r.options.start) opts["start"] = *r.options.start;
  doc["options"] = opts;
  doc["statistics"] = {{"n_observations", r.n_observations},
                       {"n_dropped", r.n_dropped},
                       {"ll_zero", r.ll_zero},
                       {"ll_start", r.ll_start},
                       {"ll_beta", r.ll_beta},
                       {"pseudo_r2", r.pseudo_r2},
                       {"converged", r.converged},
                       {"iterations", r.iterations},
                       {"gradient_norm", r.gradient_norm},
                       {"covariance_ok", r.covariance_ok},
                       {"message", r.message}};
  auto& params = doc["parameters"] = json::array();
  for (const auto& p : r.parameters) {
    params.push_back({{"label", p.label},
                      {"term", r.spec.terms()[p.term].name},
                      {"role", std::string(role_name(p.role))},
                      {"estimate", p.estimate},
                      {"std_error", optional_number(p.std_error)},
                      {"t_stat", optional_number(p.t_stat)},
                      {"p_value", optional_number(p.p_value)}});
  }
  doc["raw_parameters"] = r.raw_parameters;
  return doc;
}

EstimationOptions options_from_json(const json& opts, EstimationOptions base) {
  if (!opts.is_object()) throw InputError("options must be a JSON object");
  static constexpr std::array<std::string_view, 9> kKnown = {
      "draws",       "skip",           "max_iterations", "gradient_tolerance", "hessian",
      "draw_scheme", "mnl_warm_start", "start",          "workers"};
  for (const auto& [key, value] : opts.items()) {
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
      throw InputError(fmt::format("options: unknown field '{}'", key));
    }
  }
  EstimationOptions o = std::move(base);
  if (opts.contains("draws")) o.draws = field<std::size_t>(opts, "draws", "options");
  if (opts.contains("skip")) o.skip = field<std::size_t>(opts, "skip", "options");
  if (opts.contains("max_iterations")) {
    o.max_iterations = field<std::size_t>(opts, "max_iterations", "options");
  }
  if (opts.contains("gradient_tolerance")) {
    o.gradient_tolerance = field<double>(opts, "gradient_tolerance", "options");
  }
  if (opts.contains("hessian")) {
    const auto hessian = field<std::string>(opts, "hessian", "options");
    if (hessian != "numerical" && hessian != "outer_product") {
      throw InputError(fmt::format("options: unknown hessian method '{}'", hessian));
    }
    o.hessian = hessian == "numerical" ? HessianMethod::Numerical : HessianMethod::OuterProduct;
  }
  if (opts.contains("draw_scheme")) {
    const auto scheme = field<std::string>(opts, "draw_scheme", "options");
    if (scheme != "per_person" && scheme != "per_trip") {
      throw InputError(fmt::format("options: unknown draw_scheme '{}'", scheme));
    }
    o.draw_scheme = scheme == "per_person" ? DrawScheme::PerPerson : DrawScheme::PerTrip;
  }
  if (opts.contains("mnl_warm_start")) {
    o.mnl_warm_start = field<bool>(opts, "mnl_warm_start", "options");
  }
  if (opts.contains("start")) o.start = field<std::vector<double>>(opts, "start", "options");
  if (opts.contains("workers")) o.workers = field<unsigned>(opts, "workers", "options");
  try {
    o.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(fmt::format("options: {}", e.what()));
  }
  return o;
}

EstimationResult result_from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("result document must be a JSON object");
  const int version = field<int>(doc, "schema_version", "result");
  if (version != kResultSchemaVersion) {
    throw InputError(fmt::format("unsupported result schema_version {}", version));
  }
  if (field<std::string>(doc, "kind", "result") != "estimation_result") {
    throw InputError("document is not an estimation result");
  }

  EstimationResult r;
  try {
    r.spec = ModelSpecification::from_json(field<json>(doc, "specification", "result"));
  } catch (const SpecError& e) {
    throw InputError(fmt::format("result specification: {}", e.what()));
  }

  const json opts = field<json>(doc, "options", "result");
  for (const char* key : {"draws", "skip", "max_iterations", "gradient_tolerance", "hessian",
                          "draw_scheme", "mnl_warm_start"}) {
    if (!opts.contains(key)) throw InputError(fmt::format("options: missing field '{}'", key));
  }
  if (opts.contains("workers")) throw InputError("options: unknown field 'workers'");
  r.options = options_from_json(opts);

  const json stats = field<json>(doc, "statistics", "result");
  r.n_observations = field<std::size_t>(stats, "n_observations", "statistics");
  r.n_dropped = field<std::size_t>(stats, "n_dropped", "statistics");
  r.ll_zero = field<double>(stats, "ll_zero", "statistics");
  r.ll_start = field<double>(stats, "ll_start", "statistics");
  r.ll_beta = field<double>(stats, "ll_beta", "statistics");
  r.pseudo_r2 = field<double>(stats, "pseudo_r2", "statistics");
  r.converged = field<bool>(stats, "converged", "statistics");
  r.iterations = field<std::size_t>(stats, "iterations", "statistics");
  r.gradient_norm = field<double>(stats, "gradient_norm", "statistics");
  r.covariance_ok = field<bool>(stats, "covariance_ok", "statistics");
  r.message = field<std::string>(stats, "message", "statistics");

  const json params = field<json>(doc, "parameters", "result");
  if (!params.is_array() || params.size() != r.spec.n_parameters()) {
    throw InputError("parameters: count does not match the specification");
  }
  for (std::size_t j = 0; j < params.size(); ++j) {
    const auto& item = params[j];
    const auto& slot = r.spec.slots()[j];
    ParameterEstimate pe;
    pe.label = field<std::string>(item, "label", "parameter");
    if (pe.label != slot.label) {
      throw InputError(fmt::format("parameters[{}]: label '{}' does not match layout '{}'", j,
                                   pe.label, slot.label));
    }
    pe.term = slot.term;
    pe.role = slot.role;
    pe.estimate = field<double>(item, "estimate", "parameter");
    pe.std_error = optional_field(item, "std_error", "parameter");
    pe.t_stat = optional_field(item, "t_stat", "parameter");
    pe.p_value = optional_field(item, "p_value", "parameter");
    r.parameters.push_back(std::move(pe));
  }
  r.raw_parameters = field<std::vector<double>>(doc, "raw_parameters", "result");
  if (r.raw_parameters.size() != r.spec.n_parameters()) {
    throw InputError("raw_parameters: count does not match the specification");
  }
  return r;
}

std::string render_estimation_table(const EstimationResult& r) {
  std::vector<TableRow> rows;
  const auto& terms = r.spec.terms();
  for (Alternative alt : kAllAlternatives) {
    bool header_done = false;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      if (terms[t].alternative != alt) continue;
      if (!header_done) {
        rows.push_back({fmt::format("Defined for {}", display_name(alt)), {}});
        header_done = true;
      }
      const auto& p = r.parameters[r.spec.offset(t)];
      const std::string label = terms[t].is_constant() ? "Constant" : terms[t].name;
      if (terms[t].is_random()) {
        const auto& sd = r.parameters[r.spec.offset(t) + 1];
        rows.push_back({label,
                        {fmt::format("{:.2f} ({:.2f})", p.estimate, sd.estimate),
                         fmt::format("{} ({})", fixed(p.t_stat, 2), fixed(sd.t_stat, 2)),
                         fmt::format("{} ({})", fixed(p.p_value, 3), fixed(sd.p_value, 3))}});
      } else {
        rows.push_back({label,
                        {fmt::format("{:.2f}", p.estimate), fixed(p.t_stat, 2),
                         fixed(p.p_value, 3)}});
      }
    }
  }
  rows.push_back({"Model Statistics", {}});
  rows.push_back({"Number of observations", {format_grouped(static_cast<double>(r.n_observations), 0), "", ""}});
  rows.push_back({"Log-likelihood at zero, LL(0)", {format_grouped(r.ll_zero, 2), "", ""}});
  rows.push_back({"Log-likelihood at convergence, LL(beta)", {format_grouped(r.ll_beta, 2), "", ""}});
  rows.push_back({"rho^2 = 1 - LL(beta)/LL(0)", {fmt::format("{:.2f}", r.pseudo_r2), "", ""}});
  rows.push_back({"Estimation", {}});
  rows.push_back({"Halton draws", {fmt::format("{}", r.options.draws), "", ""}});
  rows.push_back({"Observations dropped (incomplete)", {format_grouped(static_cast<double>(r.n_dropped), 0), "", ""}});
  rows.push_back({"Converged", {r.converged ? "yes" : "no", "", ""}});
  rows.push_back({"Iterations", {fmt::format("{}", r.iterations), "", ""}});
  rows.push_back({"Gradient norm (max abs)", {fmt::format("{:.3e}", r.gradient_norm), "", ""}});
  if (!r.covariance_ok) {
    rows.push_back({"Standard errors", {"unavailable (information matrix not invertible)", "", ""}});
  }
  return layout({"Variable", "Coefficient", "t-statistic", "p-value"}, rows);
}

std::string render_coefficients_csv(const EstimationResult& r) {
  std::ostringstream out;
  csv::write_row(out, {"parameter", "term", "alternative", "kind", "role", "estimate",
                       "std_error", "t_stat", "p_value"});
  const auto num = [](const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string();
  };
  for (const auto& p : r.parameters) {
    const auto& term = r.spec.terms()[p.term];
    csv::write_row(out, {p.label, term.name, std::string(to_string(term.alternative)),
                         std::string(to_string(term.kind)), std::string(role_name(p.role)),
                         csv::format_double(p.estimate), num(p.std_error), num(p.t_stat),
                         num(p.p_value)});
  }
  return out.str();
}

std::string render_effects_table(const MarginalEffectsTable& table) {
  std::vector<TableRow> rows;
  for (Alternative alt : kAllAlternatives) {
    bool header_done = false;
    for (const auto& row : table.rows) {
      if (row.defined_for != alt) continue;
      if (!header_done) {
        rows.push_back({fmt::format("Defined for {}", display_name(alt)), {}});
        header_done = true;
      }
      std::vector<std::string> cells;
      for (double e : row.effects) cells.push_back(fmt::format("{:.4f}", e));
      rows.push_back({row.term, cells});
    }
  }
  std::vector<std::string> header{"Variable"};
  for (Alternative a : kAllAlternatives) header.emplace_back(display_name(a));
  return layout(header, rows);
}

std::string render_effects_csv(const MarginalEffectsTable& table) {
  std::ostringstream out;
  csv::write_row(out, {"term", "defined_for", "type", "personal_vehicle", "public_transport",
                       "walk", "other_mode"});
  for (const auto& row : table.rows) {
    std::vector<std::string> fields{row.term, std::string(to_string(row.defined_for)),
                                    row.discrete ? "discrete" : "derivative"};
    for (double e : row.effects) fields.push_back(csv::format_double(e));
    csv::write_row(out, fields);
  }
  return out.str();
}

}  // namespace modechoice
