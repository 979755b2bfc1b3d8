#include "rgap/scenario.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace rgap;

#ifndef RGAP_TEST_DATA
#define RGAP_TEST_DATA "tests/data"
#endif

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

std::string read(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("default scenario") {
  const Scenario s = default_scenario();
  CHECK(s.config.concentration(3) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(s.config.binding_energy() == doctest::Approx(0.5));
  CHECK(s.config.gamma() == 1.0);
  CHECK(s.degree == 4);
  CHECK(s.verify_samples == 500);
  CHECK(s.verify_seed == 0x5EEDCAFEULL);
  CHECK(s.quadrature.seed == 0x5EEDCAFEULL);
  CHECK(s.lambda_mode == LambdaElMode::Galerkin);
  CHECK(s.convention == CpsiConvention::Step4);
  CHECK(s.microreversibility_defect() < 1e-15);
  CHECK(hex64(s.hash).size() == 18);
  CHECK(default_scenario().hash == s.hash);
  const Scenario file = load_scenario(std::string(RGAP_TEST_DATA) + "/../../scenarios/default.json");
  CHECK(file.hash == s.hash);
}

TEST_CASE("canonical hash tracks content only") {
  const std::string base = default_scenario_text();
  std::string spaced = base;
  spaced.insert(spaced.find("\"gamma\""), "   ");
  CHECK(parse_scenario(spaced).hash == parse_scenario(base).hash);
  std::string changed = base;
  changed.replace(changed.find("\"degree\": 4"), 11, "\"degree\": 3");
  CHECK(parse_scenario(changed).hash != parse_scenario(base).hash);
}

TEST_CASE("validation diagnostics name the field") {
  CHECK(field_of(read(RGAP_TEST_DATA "/mass_action_violation.json")) == "mass_action_law");
  CHECK(field_of(read(RGAP_TEST_DATA "/mass_not_conserved.json")) == "mass_conservation");
  CHECK(field_of(read(RGAP_TEST_DATA "/negative_binding_energy.json")) == "binding_energy");
  CHECK(field_of("[1, 2]") == "<scenario>");
  CHECK(field_of(R"({"species": []})") == "species");
  CHECK(field_of(R"({"species": [{"mass": 1, "concentration": 1}, {"mass": 1, "concentration": 1},
                    {"mass": 1, "concentration": 1}, {"mass": 1, "concentration": 1}], "gamma": 1, "colour": 2})") == "colour");
  std::string bad_grid = default_scenario_text();
  bad_grid.replace(bad_grid.find("0:10:0.25"), 9, "0:10:-1");
  CHECK(field_of(bad_grid) == "grid");
  std::string bad_conv = default_scenario_text();
  bad_conv.replace(bad_conv.find("\"step4\""), 7, "\"other\"");
  CHECK(field_of(bad_conv) == "cpsi_convention");
}

TEST_CASE("malformed documents report line and column") {
  try {
    parse_scenario(read(RGAP_TEST_DATA "/malformed.json"), "malformed.json");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field().rfind("malformed.json:3:", 0) == 0);
  }
}

TEST_CASE("explicit backward constant") {
  const Scenario s = parse_scenario(read(RGAP_TEST_DATA "/broken_backward_constant.json"));
  CHECK_FALSE(s.kernels.reactive.derived());
  CHECK(s.microreversibility_defect() == doctest::Approx(0.5 / 1.5).epsilon(1e-12));
}

TEST_CASE("grid specifications") {
  const auto g = parse_grid("0:10:0.25");
  CHECK(g.size() == 41);
  CHECK(g.back() == doctest::Approx(10.0));
  CHECK(parse_grid("0").size() == 1);
  CHECK(parse_grid("1,2.5,4") == std::vector<double>{1, 2.5, 4});
  CHECK_THROWS_AS(parse_grid("a:b:c"), ConfigError);
  CHECK_THROWS_AS(parse_grid("-1"), ConfigError);
  CHECK_THROWS_AS(parse_grid("0:1"), ConfigError);
}
