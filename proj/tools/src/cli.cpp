#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "modechoice/choice_data.hpp"
#include "modechoice/effects.hpp"
#include "modechoice/errors.hpp"
#include "modechoice/estimate.hpp"
#include "modechoice/report.hpp"
#include "modechoice/simulate.hpp"
#include "modechoice/weather.hpp"
#include "run_config.hpp"

namespace modechoice::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raw flag values; unset flags leave the config file's value alone.
struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> trips;
  std::optional<std::string> weather;
  std::optional<std::string> observations;
  std::optional<std::string> spec;
  std::optional<std::string> result;
  std::optional<std::string> out;
  std::optional<std::size_t> draws;
  std::optional<std::size_t> skip;
  std::optional<std::size_t> max_iterations;
  std::optional<double> max_gap_minutes;
  std::optional<unsigned> workers;
  std::optional<std::string> hessian;
  bool stepwise = false;
  bool warm_start = false;
  bool per_trip = false;
  std::vector<std::string> terms;
  std::optional<std::uint64_t> seed;
  std::string kind = "survey";
  std::size_t persons = 3000;
};

RunConfig resolve(const Flags& f) {
  RunConfig cfg = f.config ? load_run_config(*f.config) : RunConfig{};
  const auto set_path = [](std::optional<fs::path>& dst, const std::optional<std::string>& src) {
    if (src) dst = fs::path(*src);
  };
  set_path(cfg.trips, f.trips);
  set_path(cfg.weather, f.weather);
  set_path(cfg.observations, f.observations);
  set_path(cfg.spec, f.spec);
  set_path(cfg.result, f.result);
  set_path(cfg.out, f.out);
  if (f.draws) cfg.options.draws = *f.draws;
  if (f.skip) cfg.options.skip = *f.skip;
  if (f.max_iterations) cfg.options.max_iterations = *f.max_iterations;
  if (f.workers) cfg.options.workers = *f.workers;
  if (f.max_gap_minutes) cfg.max_gap_minutes = *f.max_gap_minutes;
  if (f.hessian) {
    cfg.options.hessian = *f.hessian == "outer_product" ? HessianMethod::OuterProduct
                                                         : HessianMethod::Numerical;
  }
  if (f.stepwise) cfg.stepwise = true;
  if (f.warm_start) cfg.options.mnl_warm_start = true;
  if (f.per_trip) cfg.options.draw_scheme = DrawScheme::PerTrip;
  try {
    cfg.options.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  if (cfg.max_gap_minutes < 0.0) throw InputError("--max-gap-minutes must be non-negative");
  return cfg;
}

fs::path require_out(const RunConfig& cfg) {
  if (!cfg.out) throw InputError("missing --out directory");
  check_output_dir(*cfg.out);
  return *cfg.out;
}

bool is_empty_text(const std::string& text) {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; });
}

struct Prepared {
  std::vector<ChoiceObservation> observations;
  std::size_t records_read = 0;
  std::size_t retained = 0;
  std::size_t incomplete = 0;
};

Prepared prepare_trips(const fs::path& path, unsigned workers, std::ostream& err) {
  const std::string text = read_text_file(path);
  Prepared p;
  if (is_empty_text(text)) {
    err << fmt::format("warning: {} contains no trip records\n", path.string());
    return p;
  }
  std::istringstream in(text);
  const auto records = read_trips_csv(in);
  if (records.empty()) err << fmt::format("warning: {} contains no trip records\n", path.string());
  const auto kept = filter_tld_adults(records);
  p.records_read = records.size();
  p.retained = kept.size();
  p.observations = recode_all(kept, workers);
  p.incomplete = static_cast<std::size_t>(std::count_if(
      p.observations.begin(), p.observations.end(), [](const auto& o) { return o.incomplete; }));
  return p;
}

std::vector<WeatherRecord> load_weather(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  auto records = read_weather_csv(in);
  if (records.empty()) throw InputError(fmt::format("{} contains no weather records", path.string()));
  return records;
}

std::vector<ChoiceObservation> load_observations_file(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  return read_observations_csv(in);
}

// Observations from a prepared CSV, or from raw trips (fused when a weather
// file is configured).
std::vector<ChoiceObservation> model_observations(const RunConfig& cfg, std::ostream& err) {
  if (cfg.observations) {
    require_file(cfg.observations, "observations");
    return load_observations_file(*cfg.observations);
  }
  if (!cfg.trips) throw InputError("missing --observations or --trips input");
  require_file(cfg.trips, "trips");
  if (cfg.weather) require_file(cfg.weather, "weather");
  auto prepared = prepare_trips(*cfg.trips, cfg.options.workers, err);
  if (!cfg.weather) return std::move(prepared.observations);
  const WeatherIndex index(load_weather(*cfg.weather));
  return fuse(std::move(prepared.observations), index, MatchOptions{cfg.max_gap_minutes},
              cfg.options.workers);
}

ModelSpecification load_spec(const RunConfig& cfg) {
  require_file(cfg.spec, "spec");
  return parse_model_spec(read_text_file(*cfg.spec));
}

EstimationResult load_result(const RunConfig& cfg) {
  require_file(cfg.result, "result");
  json doc;
  try {
    doc = json::parse(read_text_file(*cfg.result));
  } catch (const json::parse_error& e) {
    throw InputError(fmt::format("malformed result JSON at byte {}", e.byte));
  }
  return result_from_json(doc);
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

std::string observations_csv(std::span<const ChoiceObservation> obs) {
  std::ostringstream os;
  write_observations_csv(os, obs);
  return os.str();
}

// ---------------------------------------------------------------------------

int cmd_prepare(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve(f);
  require_file(cfg.trips, "trips");
  const auto dir = require_out(cfg);
  const auto p = prepare_trips(*cfg.trips, cfg.options.workers, err);

  OutputSet files;
  files.add("observations.csv", observations_csv(p.observations));
  const json summary = {{"schema_version", 1},
                        {"kind", "prepare_summary"},
                        {"records_read", p.records_read},
                        {"retained", p.retained},
                        {"excluded", p.records_read - p.retained},
                        {"incomplete", p.incomplete}};
  files.add("prepare_summary.json", dump(summary));
  files.commit(dir);
  out << fmt::format("records read: {}\nretained (adults with a travel-limiting disability): {}\nexcluded: {}\nincomplete: {}\n",
                     p.records_read, p.retained, p.records_read - p.retained, p.incomplete);
  return kExitOk;
}

int cmd_fuse(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve(f);
  require_file(cfg.weather, "weather");
  if (cfg.observations) {
    require_file(cfg.observations, "observations");
  } else {
    require_file(cfg.trips, "trips");
  }
  const auto dir = require_out(cfg);
  const WeatherIndex index(load_weather(*cfg.weather));
  auto obs = cfg.observations ? load_observations_file(*cfg.observations)
                              : prepare_trips(*cfg.trips, cfg.options.workers, err).observations;
  obs = fuse(std::move(obs), index, MatchOptions{cfg.max_gap_minutes}, cfg.options.workers);

  std::size_t missing_origin = 0;
  std::size_t missing_dest = 0;
  for (const auto& o : obs) {
    missing_origin += !o.covariate("origin_temperature").has_value();
    missing_dest += !o.covariate("dest_temperature").has_value();
  }
  OutputSet files;
  files.add("fused.csv", observations_csv(obs));
  const json summary = {{"schema_version", 1},
                        {"kind", "fuse_summary"},
                        {"observations", obs.size()},
                        {"stations", index.stations().size()},
                        {"max_gap_minutes", cfg.max_gap_minutes},
                        {"origin_temperature_missing", missing_origin},
                        {"dest_temperature_missing", missing_dest}};
  files.add("fuse_summary.json", dump(summary));
  files.commit(dir);
  out << fmt::format("observations: {}\norigin temperature missing: {}\ndestination temperature missing: {}\n",
                     obs.size(), missing_origin, missing_dest);
  return kExitOk;
}

std::string render_steps(const StepwiseResult& sw) {
  std::string text = "Stepwise retention (|t| < 1.96 removed one term per round)\n";
  if (sw.steps.empty()) text += "  no terms removed\n";
  for (const auto& s : sw.steps) {
    text += fmt::format("  {} {} (|t| = {:.2f})\n", s.demoted ? "demoted to fixed:" : "removed:",
                        s.term, s.abs_t);
  }
  return text;
}

int cmd_estimate(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve(f);
  const auto spec = load_spec(cfg);
  const auto dir = require_out(cfg);
  const auto obs = model_observations(cfg, err);
  if (obs.empty()) throw InputError("no observations to estimate on");

  OutputSet files;
  EstimationResult result;
  if (cfg.stepwise) {
    auto sw = stepwise_retain(spec, obs, cfg.options);
    files.add("stepwise.txt", render_steps(sw));
    files.add("retained_spec.json", dump(sw.spec.to_json()));
    result = std::move(sw.result);
  } else {
    result = maximize(spec, obs, cfg.options);
  }
  const std::string table = render_estimation_table(result);
  files.add("result.json", dump(to_json(result)));
  files.add("estimates.txt", table);
  files.add("coefficients.csv", render_coefficients_csv(result));
  files.commit(dir);
  out << table;
  if (!result.converged) {
    err << fmt::format("warning: estimation did not converge: {}\n", result.message);
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_effects(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve(f);
  auto result = load_result(cfg);
  result.options.workers = cfg.options.workers;
  const auto dir = require_out(cfg);
  const auto obs = model_observations(cfg, err);
  const auto table = marginal_effects(result, obs, f.terms);

  std::string text = render_effects_table(table);
  bool any_random = false;
  for (std::size_t t = 0; t < result.spec.terms().size(); ++t) {
    const auto& term = result.spec.terms()[t];
    if (!term.is_random()) continue;
    const std::size_t k = result.spec.offset(t);
    const double mean = result.raw_parameters[k];
    const double sd = std::abs(result.raw_parameters[k + 1]);
    if (!any_random) text += "\nRandom coefficients: share of the population below zero\n";
    any_random = true;
    text += sd > 0.0 ? fmt::format("  {}: {:.2f}%\n", term.name, 100.0 * share_below_zero(mean, sd))
                     : fmt::format("  {}: — (sd is 0)\n", term.name);
  }
  OutputSet files;
  files.add("effects.txt", text);
  files.add("effects.csv", render_effects_csv(table));
  files.commit(dir);
  out << text;
  return kExitOk;
}

int cmd_report(const Flags& f, std::ostream& out, std::ostream&) {
  const auto cfg = resolve(f);
  const auto result = load_result(cfg);
  const std::string table = render_estimation_table(result);
  if (cfg.out) {
    check_output_dir(*cfg.out);
    OutputSet files;
    files.add("estimates.txt", table);
    files.add("coefficients.csv", render_coefficients_csv(result));
    files.commit(*cfg.out);
  }
  out << table;
  return kExitOk;
}

int cmd_simulate(const Flags& f, std::ostream& out, std::ostream&) {
  const auto cfg = resolve(f);
  const auto dir = require_out(cfg);
  OutputSet files;
  if (f.kind == "survey") {
    if (f.persons == 0) throw InputError("--persons must be positive");
    const auto fx = simulate_survey(f.persons, *f.seed);
    std::ostringstream trips;
    write_trips_csv(trips, fx.trips);
    std::ostringstream weather;
    write_weather_csv(weather, fx.weather);
    files.add("trips.csv", trips.str());
    files.add("weather.csv", weather.str());
    files.add("spec.json", dump(survey_specification().to_json()));
    out << fmt::format("trips: {}\nweather records: {}\n", fx.trips.size(), fx.weather.size());
  } else {
    require_file(cfg.spec, "simulation spec");
    json doc;
    try {
      doc = json::parse(read_text_file(*cfg.spec));
    } catch (const json::parse_error& e) {
      throw InputError(fmt::format("malformed simulation JSON at byte {}", e.byte));
    }
    const auto sim = simulation_from_json(doc, *f.seed);
    const auto obs = simulate_choices(sim);
    files.add("observations.csv", observations_csv(obs));
    files.add("spec.json", dump(sim.spec.to_json()));
    out << fmt::format("observations: {}\n", obs.size());
  }
  files.commit(dir);
  return kExitOk;
}

void add_paths(CLI::App* sub, Flags& f, bool trips, bool weather, bool observations) {
  sub->add_option("--config", f.config, "JSON run config; flags override its values");
  if (trips) sub->add_option("--trips", f.trips, "Raw trips CSV");
  if (weather) sub->add_option("--weather", f.weather, "Station weather CSV");
  if (observations) sub->add_option("--observations", f.observations, "Prepared observations CSV");
  sub->add_option("--workers", f.workers, "Worker threads (default 1)")->check(CLI::Range(1u, 1024u));
}

void add_estimation(CLI::App* sub, Flags& f) {
  sub->add_option("--draws", f.draws, "Halton draws per individual (default 200)");
  sub->add_option("--skip", f.skip, "Leading Halton points discarded (default 100)");
  sub->add_option("--max-iterations", f.max_iterations, "BFGS iteration cap (default 500)");
  sub->add_option("--max-gap-minutes", f.max_gap_minutes,
                  "Largest station-to-trip time gap (default 180)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mode choice estimation for travellers with travel-limiting disabilities",
               "modechoice"};
  app.require_subcommand(1);
  Flags f;

  auto* prepare = app.add_subcommand("prepare", "Filter and recode raw trips into observations");
  add_paths(prepare, f, true, false, false);
  prepare->add_option("--out", f.out, "Output directory")->required();

  auto* fuse_cmd = app.add_subcommand("fuse", "Attach origin and destination weather");
  add_paths(fuse_cmd, f, true, true, true);
  fuse_cmd->add_option("--out", f.out, "Output directory")->required();
  fuse_cmd->add_option("--max-gap-minutes", f.max_gap_minutes,
                       "Largest station-to-trip time gap (default 180)");

  auto* estimate = app.add_subcommand("estimate", "Fit a random parameters logit");
  add_paths(estimate, f, true, true, true);
  add_estimation(estimate, f);
  estimate->add_option("--spec", f.spec, "Model specification JSON");
  estimate->add_option("--out", f.out, "Output directory");
  estimate->add_option("--hessian", f.hessian, "numerical or outer_product")
      ->check(CLI::IsMember({"numerical", "outer_product"}));
  estimate->add_flag("--stepwise", f.stepwise, "Drop terms with |t| < 1.96 one at a time");
  estimate->add_flag("--warm-start", f.warm_start, "Seed means from a fixed-coefficient fit");
  estimate->add_flag("--per-trip-draws", f.per_trip, "Independent draws for every trip");

  auto* effects = app.add_subcommand("effects", "Average marginal effects of a fitted model");
  add_paths(effects, f, true, true, true);
  effects->add_option("--result", f.result, "Result JSON from estimate");
  effects->add_option("--out", f.out, "Output directory");
  effects->add_option("--terms", f.terms, "Term names (default: all non-constant terms)")
      ->delimiter(',');
  effects->add_option("--max-gap-minutes", f.max_gap_minutes,
                      "Largest station-to-trip time gap (default 180)");

  auto* report = app.add_subcommand("report", "Render a result JSON as tables");
  report->add_option("--config", f.config, "JSON run config; flags override its values");
  report->add_option("--result", f.result, "Result JSON from estimate");
  report->add_option("--out", f.out, "Output directory (tables are always printed)");

  auto* simulate = app.add_subcommand("simulate-fixture", "Write a seeded synthetic dataset");
  simulate->add_option("--seed", f.seed, "Random seed")->required();
  simulate->add_option("--kind", f.kind, "survey or observations")
      ->check(CLI::IsMember({"survey", "observations"}));
  simulate->add_option("--spec", f.spec, "Simulation document (observations kind)");
  simulate->add_option("--persons", f.persons, "Persons in the survey fixture (default 3000)");
  simulate->add_option("--out", f.out, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (prepare->parsed()) return cmd_prepare(f, out, err);
    if (fuse_cmd->parsed()) return cmd_fuse(f, out, err);
    if (estimate->parsed()) return cmd_estimate(f, out, err);
    if (effects->parsed()) return cmd_effects(f, out, err);
    if (report->parsed()) return cmd_report(f, out, err);
    if (simulate->parsed()) return cmd_simulate(f, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace modechoice::cli
