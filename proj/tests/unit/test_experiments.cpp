#include <algorithm>
#include <limits>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "qsync/csv.hpp"
#include "qsync/experiments.hpp"

using namespace qsync;

namespace {

Scenario short_scenario(ControlLaw law, double t_end = 60.0) {
  Scenario sc;
  sc.name = "short";
  sc.params.omega_m1 = 1.0;
  sc.params.omega_m2 = 1.005;
  sc.params.g1 = 0.008;
  sc.params.g2 = 0.005;
  sc.params.drive = 10.0;
  sc.params.kappa = 0.15;
  sc.params.gamma1 = sc.params.gamma2 = 0.005;
  sc.params.nbar = 0.05;
  sc.law = law;
  sc.integrator.dt = 0.005;
  sc.integrator.t_end = t_end;
  sc.integrator.output_stride = 20;
  return sc;
}

}  // namespace

TEST_CASE("csv number formatting") {
  CHECK(csv::real(0.0) == "0");
  CHECK(csv::real(1.0 / 3.0) == "0.333333333333");
  CHECK(csv::real(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("trajectory csv") {
  const Trajectory tr = simulate(short_scenario(ConstantErrorLaw{2.0, 3.0}, 1.0));
  std::ostringstream out;
  write_trajectory_csv(out, tr);
  const std::string text = out.str();
  CHECK(text.rfind(std::string(kTrajectoryHeader) + "\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + static_cast<long>(tr.samples.size()));
  CHECK(text.find('\r') == std::string::npos);
}

TEST_CASE("summary json echoes the scenario") {
  const Scenario sc = short_scenario(ConstantErrorLaw{2.0, 3.0});
  const RunOutput out = run_scenario(sc);
  const auto j = nlohmann::json::parse(summary_json(sc, out.summary));
  CHECK(parse_scenario(j.at("scenario").dump()) == sc);
  CHECK(out.summary.window == TimeWindow{30.0, 60.0});
  CHECK(out.summary.sync.has_value());
}

TEST_CASE("moments") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const Moments m = moments(xs);
  CHECK(m.mean == 2.5);
  CHECK(m.stddev == doctest::Approx(1.2909944487));
  const std::vector<double> one{7.0};
  CHECK(moments(one).stddev == 0.0);
}

TEST_CASE("sweep rows follow the given order and are reproducible") {
  SweepSpec spec;
  spec.name = "sw";
  spec.base = short_scenario(ConstantErrorLaw{2.0, 3.0}, 40.0);
  spec.axis = SweepAxis::CMinus;
  spec.values = {3.0, 0.5, 2.0};
  const auto rows = run_sweep(spec, 3);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].value == 3.0);
  CHECK(rows[1].value == 0.5);
  CHECK(rows[2].value == 2.0);

  std::ostringstream a, b;
  write_sweep_csv(a, rows, 1);
  write_sweep_csv(b, run_sweep(spec, 1), 1);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("value,sg_avg,lyap_max,neg_max,r,status\n", 0) == 0);
}

TEST_CASE("robustness study") {
  Scenario sc = short_scenario(ConstantErrorLaw{2.0, 3.0}, 160.0);
  const std::vector<double> sigmas{0.05, 0.01};
  const auto rows = robustness_study(sc, sigmas, 4, 2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].sigma == 0.0);
  CHECK(rows[0].r.mean == 1.0);
  CHECK(rows[0].r.stddev == 0.0);
  CHECK(rows[1].sigma == 0.05);
  CHECK(rows[1].replicas == 4);
  // more noise, less robust
  CHECK(rows[1].r.mean < rows[2].r.mean);
  CHECK(rows[2].r.mean < 1.0);

  std::ostringstream out;
  write_robustness_csv(out, rows);
  CHECK(out.str().rfind("sigma,r_mean,r_std,replicas\n", 0) == 0);
}
