#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "modechoice/errors.hpp"
#include "modechoice/report.hpp"
#include "modechoice/simulate.hpp"

using namespace modechoice;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::filesystem::path kData = MODECHOICE_TEST_DATA_DIR;

nlohmann::json small_result() { return nlohmann::json::parse(slurp(kData / "result_small.json")); }

}  // namespace

TEST_CASE("grouped number formatting") {
  CHECK(format_grouped(12345.678, 2) == "12,345.68");
  CHECK(format_grouped(-10914.2955, 2) == "-10,914.30");
  CHECK(format_grouped(7873, 0) == "7,873");
  CHECK(format_grouped(999, 0) == "999");
  CHECK(format_grouped(1000000, 1) == "1,000,000.0");
  CHECK(format_grouped(-0.5, 2) == "-0.50");
}

TEST_CASE("golden estimation table") {
  const auto r = result_from_json(small_result());
  CHECK(render_estimation_table(r) == slurp(kData / "result_small_table.txt"));
}

TEST_CASE("table content: model statistics and a missing standard error") {
  const auto table = render_estimation_table(result_from_json(small_result()));
  CHECK(table.find("-10,914.30") != std::string::npos);
  CHECK(table.find("-2,787.27") != std::string::npos);
  CHECK(table.find("0.74") != std::string::npos);
  CHECK(table.find("7,873") != std::string::npos);
  CHECK(table.find("-2.54 (2.84)") != std::string::npos);
  CHECK(table.find("0.018 (0.027)") != std::string::npos);
  CHECK(table.find("\xE2\x80\x94") != std::string::npos);
}

TEST_CASE("rendering is deterministic") {
  const auto r = result_from_json(small_result());
  CHECK(render_estimation_table(r) == render_estimation_table(r));
  CHECK(render_coefficients_csv(r) == render_coefficients_csv(result_from_json(small_result())));
}

TEST_CASE("JSON round trip preserves the result") {
  const auto doc = small_result();
  const auto r = result_from_json(doc);
  CHECK(to_json(r) == doc);
  CHECK(r.spec.n_parameters() == 5);
  CHECK(r.parameters[1].p_value.has_value());
  CHECK_FALSE(r.parameters[2].std_error.has_value());
  CHECK(r.raw_parameters[4] == -2.84);
  CHECK(r.parameters[4].estimate == 2.84);
  CHECK(r.n_dropped == 143);
}

TEST_CASE("unsupported or malformed result documents are rejected") {
  auto doc = small_result();
  doc["schema_version"] = 2;
  CHECK_THROWS_WITH_AS(result_from_json(doc), doctest::Contains("schema_version"), InputError);
  doc = small_result();
  doc["kind"] = "something_else";
  CHECK_THROWS_AS(result_from_json(doc), InputError);
  doc = small_result();
  doc["parameters"].erase(0);
  CHECK_THROWS_AS(result_from_json(doc), InputError);
  doc = small_result();
  doc["statistics"].erase("ll_zero");
  CHECK_THROWS_AS(result_from_json(doc), InputError);
  doc = small_result();
  doc["options"]["workers"] = 4;
  CHECK_THROWS_AS(result_from_json(doc), InputError);
  CHECK_THROWS_AS(result_from_json(nlohmann::json::array()), InputError);
}

TEST_CASE("options block: every key optional, unknown keys and bad values rejected") {
  const auto base = options_from_json(nlohmann::json::object());
  CHECK(base.draws == EstimationOptions{}.draws);
  const auto o = options_from_json({{"draws", 50}, {"hessian", "outer_product"}, {"draw_scheme", "per_trip"},
                                    {"workers", 3}, {"start", {0.1, 0.2}}});
  CHECK(o.draws == 50);
  CHECK(o.hessian == HessianMethod::OuterProduct);
  CHECK(o.draw_scheme == DrawScheme::PerTrip);
  CHECK(o.workers == 3);
  CHECK(o.start == std::vector<double>{0.1, 0.2});
  CHECK_THROWS_AS(options_from_json({{"drawz", 5}}), InputError);
  CHECK_THROWS_AS(options_from_json({{"draws", 0}}), InputError);
  CHECK_THROWS_AS(options_from_json({{"hessian", "bhhh?"}}), InputError);
  CHECK_THROWS_AS(options_from_json({{"draws", "many"}}), InputError);
}

TEST_CASE("coefficient CSV has one row per parameter and blank missing statistics") {
  const auto csv = render_coefficients_csv(result_from_json(small_result()));
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "parameter,term,alternative,kind,role,estimate,std_error,t_stat,p_value");
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 5);
  CHECK(lines[2].substr(lines[2].size() - 3) == ",,,");
  CHECK(lines[4].rfind("purpose_nonwork.sd,purpose_nonwork,", 0) == 0);
}

TEST_CASE("effects table and CSV") {
  MarginalEffectsTable t;
  t.rows.push_back({"age_over_65", Alternative::PersonalVehicle, true, {0.0263, -0.0057, -0.0149, -0.0057}});
  t.rows.push_back({"log_trip_length", Alternative::Walk, false, {0.01, 0.02, -0.04, 0.01}});
  const auto table = render_effects_table(t);
  CHECK(table.find("Defined for Personal Vehicle") < table.find("Defined for Walk"));
  CHECK(table.find("0.0263") != std::string::npos);
  CHECK(table.find("-0.0149") != std::string::npos);
  const auto csv = render_effects_csv(t);
  CHECK(csv.find("age_over_65") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(render_effects_table(t) == table);
}
