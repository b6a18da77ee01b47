#include <cmath>
#include <vector>

#include "doctest.h"
#include "qsync/dynamics.hpp"
#include "qsync/errors.hpp"
#include "qsync/measures.hpp"

using namespace qsync;

namespace {

SystemParams reference_params() {
  SystemParams p;
  p.omega_m1 = 1.0;
  p.omega_m2 = 1.005;
  p.g1 = 0.008;
  p.g2 = 0.005;
  p.drive = 10.0;
  p.kappa = 0.15;
  p.gamma1 = p.gamma2 = 0.005;
  p.nbar = 0.05;
  return p;
}

IntegratorConfig config(double dt, double t_end, std::int64_t stride, bool cov) {
  IntegratorConfig c;
  c.dt = dt;
  c.t_end = t_end;
  c.output_stride = stride;
  c.record_covariance = cov;
  return c;
}

}  // namespace

TEST_CASE("delay history lookup") {
  DelayHistory h(8);
  CHECK_THROWS_AS(h.lookup(0.0), Error);
  h.append({0.0, 1.0, 10.0, 100.0});
  h.append({1.0, 3.0, 20.0, 50.0});

  const DelaySample mid = h.lookup(0.5);
  CHECK(mid.q2 == doctest::Approx(2.0));
  CHECK(mid.p2 == doctest::Approx(15.0));
  CHECK(mid.a_sq == doctest::Approx(75.0));

  const DelaySample last = h.lookup(1.0);
  CHECK(last.q2 == 3.0);
  CHECK(last.p2 == 20.0);

  const DelaySample before = h.lookup(-2.0);
  CHECK(before.q2 == 1.0);
  CHECK(before.a_sq == 100.0);

  CHECK_THROWS_AS(h.lookup(1.5), Error);
  CHECK_THROWS_AS(h.append({1.0, 0.0, 0.0, 0.0}), Error);
}

TEST_CASE("delay history evicts old samples but keeps the origin") {
  DelayHistory h(4);
  for (int i = 0; i < 10; ++i) h.append({double(i), double(i), 0.0, 0.0});
  CHECK(h.size() == 4);
  CHECK(h.lookup(7.5).q2 == doctest::Approx(7.5));
  CHECK(h.lookup(-1.0).q2 == 0.0);
  try {
    h.lookup(2.0);
    FAIL("expected WindowTooShort");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::WindowTooShort);
  }
}

TEST_CASE("interpolate_linear") {
  const std::vector<double> t{0.0, 1.0, 3.0};
  const std::vector<double> v{0.0, 2.0, 0.0};
  CHECK(interpolate_linear(t, v, -1.0) == 0.0);
  CHECK(interpolate_linear(t, v, 0.25) == doctest::Approx(0.5));
  CHECK(interpolate_linear(t, v, 2.0) == doctest::Approx(1.0));
  CHECK(interpolate_linear(t, v, 3.0) == 0.0);
}

TEST_CASE("integrator config") {
  CHECK_NOTHROW(config(1e-3, 10.0, 10, true).validate());
  CHECK_THROWS_AS(config(0.02, 10.0, 10, true).validate(), Error);
  CHECK_THROWS_AS(config(0.0, 10.0, 10, true).validate(), Error);
  CHECK_THROWS_AS(config(1e-3, 10.0, 0, true).validate(), Error);
  CHECK(config(1e-3, 10.0, 10, true).steps() == 10000);
}

TEST_CASE("undriven vacuum is stationary") {
  SystemParams p = reference_params();
  p.drive = 0.0;
  p.g1 = p.g2 = 0.0;
  p.nbar = 0.0;
  const Trajectory tr = integrate(p, NoControl{}, MeanState{}, CovarianceState::initial(0.0),
                                  config(1e-3, 20.0, 1000, true), 1);
  for (const auto& s : tr.samples) {
    CHECK(s.state == MeanState{});
    CHECK(std::abs(s.covariance->coeff(0, 0) - 0.5) < 1e-12);
    CHECK(std::abs(s.covariance->coeff(1, 1) - 0.5) < 1e-12);
    CHECK(std::abs(s.covariance->coeff(0, 1)) < 1e-12);
  }
}

TEST_CASE("zero drift: covariance grows linearly with the noise") {
  CovarianceState d = CovarianceState::initial(0.3);
  const Mat6 d0 = d.d;
  Mat6 noise = Mat6::Zero();
  noise.diagonal() << 0.15, 0.15, 0.0, 0.0055, 0.0, 0.0055;
  const DriftStages zero{Mat6::Zero(), Mat6::Zero(), Mat6::Zero(), Mat6::Zero()};
  const double dt = 1e-3;
  for (int i = 0; i < 10000; ++i) advance_covariance(d, zero, noise, dt);
  const double t = 10.0;
  CHECK((d.d - (d0 + noise * t)).cwiseAbs().maxCoeff() <= 1e-9 * t);
}

TEST_CASE("decoupled cavity relaxes to vacuum") {
  SystemParams p = reference_params();
  p.g1 = p.g2 = 0.0;
  CovarianceState d0 = CovarianceState::initial(p.nbar);
  d0.d(0, 0) = d0.d(1, 1) = 3.0;
  const Trajectory tr = integrate(p, NoControl{}, MeanState{}, d0, config(1e-3, 100.0, 1000, true), 1);
  const Mat6& d = *tr.samples.back().covariance;
  const Eigen::Matrix2d block = d.block<2, 2>(0, 0);
  CHECK((block - 0.5 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("trajectory sampling") {
  const Trajectory tr = integrate(reference_params(), NoControl{}, MeanState{},
                                  CovarianceState::initial(0.05), config(1e-3, 1.0, 100, true), 1);
  REQUIRE(tr.samples.size() == 11);
  CHECK(tr.samples.front().t == 0.0);
  CHECK(tr.samples.back().t == doctest::Approx(1.0));
  CHECK(tr.spacing() == doctest::Approx(0.1));
  CHECK(tr.samples.front().sync.has_value());

  const Trajectory bare = integrate(reference_params(), NoControl{}, MeanState{},
                                    CovarianceState::initial(0.05), config(1e-3, 1.0, 100, false), 1);
  CHECK_FALSE(bare.samples.front().covariance.has_value());
  CHECK(bare.samples.back().state == tr.samples.back().state);
}

TEST_CASE("blow-up is reported with its time") {
  SystemParams p = reference_params();
  MeanState s;
  s.q1 = 1e300;
  s.p1 = 1e300;
  try {
    integrate(p, NoControl{}, s, CovarianceState::initial(0.05), config(1e-3, 1.0, 100, false), 1);
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    CHECK(e.time() >= 0.0);
    CHECK(e.time() < 1.0);
  }
}

TEST_CASE("simulator matches integrate") {
  const SystemParams p = reference_params();
  const ControlLaw law = TimeDelayLaw{2.0, 0.5, 1.0};
  const Trajectory tr = integrate(p, law, MeanState{}, CovarianceState::initial(0.05),
                                  config(1e-3, 2.0, 2000, false), 3);
  Simulator sim(p, Controller(law, 0.0, 3), MeanState{}, std::nullopt, 1e-3);
  for (int i = 0; i < 2000; ++i) {
    sim.prepare();
    sim.advance();
  }
  CHECK(sim.state() == tr.samples.back().state);
}
