#include <sstream>
#include <string>

#include "doctest.h"
#include "qsync/errors.hpp"
#include "qsync/experiments.hpp"
#include "qsync/scenario.hpp"

using namespace qsync;

namespace {

const char* kFig2 = R"({
  "name": "fig2",
  "params": {"omega_m1": 1, "omega_m2": 1.005, "g1": 0.008, "g2": 0.005,
             "E": 10, "kappa": 0.15, "gamma": 0.005, "nbar": 0.05},
  "control": {"law": "constant_error", "k": 2, "c_minus": 3},
  "integrator": {"dt": 0.001, "t_end": 500, "output_stride": 100}
})";

std::string config_key(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<accepted>";
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  s.replace(s.find(from), from.size(), to);
  return s;
}

}  // namespace

TEST_CASE("scenario parsing") {
  const Scenario sc = parse_scenario(kFig2);
  CHECK(sc.name == "fig2");
  CHECK(sc.params.delta == 1.0);
  CHECK(sc.params.gamma1 == 0.005);
  CHECK(sc.params.gamma2 == 0.005);
  CHECK(sc.params.drive == 10.0);
  CHECK(std::get<ConstantErrorLaw>(sc.law) == ConstantErrorLaw{2.0, 3.0});
  CHECK(sc.integrator.steps() == 500000);
  CHECK(sc.window() == TimeWindow{250.0, 500.0});
  CHECK(sc.mapping().h2 == GeneralizedMapping::constant_shift(3.0));
  CHECK(sc.seed == 1);
}

TEST_CASE("config errors carry the key path") {
  CHECK(config_key(replace(kFig2, R"("kappa": 0.15, )", "")).find("kappa") != std::string::npos);
  CHECK(config_key(replace(kFig2, R"("kappa": 0.15)", R"("kappa": -1)")) == "params.kappa");
  CHECK(config_key(replace(kFig2, R"("k": 2)", R"("k": 2, "bogus": 1)")) == "control.bogus");
  CHECK(config_key(replace(kFig2, R"("nbar": 0.05)", R"("nbar": 0.05, "temperature_K": 0.001)")) !=
        "<accepted>");
  CHECK(config_key(replace(kFig2, R"("gamma": 0.005)", R"("gamma1": 0.005, "gamma2": 0.006)")) !=
        "<accepted>");
  CHECK(config_key(replace(kFig2, "constant_error", "pid")) == "control.law");
  CHECK(config_key("{not json") != "<accepted>");
}

TEST_CASE("temperature is converted to an occupation") {
  const Scenario sc =
      parse_scenario(replace(kFig2, R"("nbar": 0.05)", R"("temperature_K": 0.01)"));
  REQUIRE(sc.temperature_kelvin.has_value());
  CHECK(sc.params.nbar == doctest::Approx(6.14).epsilon(1e-3));
}

TEST_CASE("scenario echo round-trips") {
  const Scenario sc = parse_scenario(kFig2);
  CHECK(parse_scenario(scenario_to_json(sc)) == sc);

  Scenario td = sc;
  td.name = "td";
  td.law = TimeDelayLaw{2.0, 5.0, 1.0};
  td.mapping_override = MappingPair{{}, GeneralizedMapping::time_shift(4.5)};
  td.window_override = TimeWindow{100.0, 400.0};
  td.seed = 99;
  td.noise_sigma = 0.02;
  td.integrator.record_covariance = false;
  CHECK(parse_scenario(scenario_to_json(td)) == td);
}

TEST_CASE("sweep specs") {
  const std::string text = std::string(R"({"name": "s", "axis": "c_minus", "values": [0, 1.5], "base": )") +
                           kFig2 + "}";
  const SweepSpec spec = parse_sweep(text, ".");
  CHECK(spec.axis == SweepAxis::CMinus);
  CHECK(spec.values.size() == 2);
  CHECK(spec.replicas == 1);
  const Scenario at = spec.at(1.5);
  CHECK(std::get<ConstantErrorLaw>(at.law).c_minus == 1.5);
  CHECK(at.mapping().h2 == GeneralizedMapping::constant_shift(1.5));

  CHECK(spec.at(0.0).params == spec.base.params);

  const std::string wrong = replace(text, "c_minus\"", "tau\"");
  CHECK_THROWS_AS(parse_sweep(wrong, "."), ConfigError);
}
