#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qsync/errors.hpp"
#include "qsync/model.hpp"

using namespace qsync;

namespace {

SystemParams fig2_params() {
  SystemParams p;
  p.delta = 1.0;
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

}  // namespace

TEST_CASE("mean field: undriven empty cavity is a fixed point") {
  SystemParams p = fig2_params();
  p.drive = 0.0;
  const MeanState d = mean_field_deriv(p, MeanState{}, 0.0, 0.0);
  CHECK(d == MeanState{});
}

TEST_CASE("mean field: bare harmonic restoring force") {
  SystemParams p = fig2_params();
  p.g1 = p.g2 = 0.0;
  MeanState s;
  s.q1 = 1.0;
  const MeanState d = mean_field_deriv(p, s, 0.0, 0.0);
  CHECK(d.p1 == doctest::Approx(-1.0));
  CHECK(d.q1 == 0.0);
}

TEST_CASE("mean field: radiation pressure and drive") {
  MeanState s;
  s.a_re = 1.0;
  const MeanState d = mean_field_deriv(fig2_params(), s, 0.0, 0.0);
  CHECK(d.p1 == doctest::Approx(0.008).epsilon(1e-12));
  CHECK(d.p2 == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(d.a_re == doctest::Approx(-0.15 + 10.0));
  CHECK(d.a_im == doctest::Approx(1.0));
}

TEST_CASE("mean field: control scales the mechanical potential") {
  SystemParams p = fig2_params();
  p.g1 = p.g2 = 0.0;
  MeanState s;
  s.q1 = 2.0;
  s.q2 = 2.0;
  const MeanState d = mean_field_deriv(p, s, -0.5, 1.0);
  CHECK(d.p1 == doctest::Approx(-1.0));
  CHECK(d.p2 == doctest::Approx(-1.005 * 2.0 * 2.0));
}

TEST_CASE("drift matrix") {
  SUBCASE("uncoupled is block diagonal") {
    SystemParams p = fig2_params();
    p.g1 = p.g2 = 0.0;
    MeanState s;
    s.a_re = 1.7;
    s.a_im = -0.4;
    s.q1 = 0.3;
    const Mat6 m = build_drift_matrix(p, s, 0.2, -0.1);
    CHECK(m(0, 0) == -0.15);
    CHECK(m(0, 1) == -1.0);
    CHECK(m(1, 0) == 1.0);
    CHECK(m(1, 1) == -0.15);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        if (i / 2 != j / 2) CHECK(m(i, j) == 0.0);
      }
    }
  }
  SUBCASE("q1 row carries omega_m1") {
    MeanState s;
    s.a_re = 3.0;
    s.q2 = -1.0;
    CHECK(build_drift_matrix(fig2_params(), s, 0.4, 0.0)(idx::q1, idx::p1) == 1.0);
  }
  SUBCASE("radiation-pressure entry") {
    MeanState s;
    s.a_re = 2.0;
    const Mat6 m = build_drift_matrix(fig2_params(), s, 0.0, 0.0);
    CHECK(m(idx::p1, idx::x) == doctest::Approx(std::sqrt(2.0) * 0.008 * 2.0));
    CHECK(m(idx::p1, idx::x) == doctest::Approx(0.022627).epsilon(1e-5));
  }
}

TEST_CASE("noise matrix") {
  const Mat6 n = build_noise_matrix(fig2_params());
  const double expected[6] = {0.15, 0.15, 0.0, 0.0055, 0.0, 0.0055};
  for (int i = 0; i < 6; ++i) CHECK(n(i, i) == doctest::Approx(expected[i]).epsilon(1e-12));
  CHECK((n - Mat6(n.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);

  SystemParams cold = fig2_params();
  cold.nbar = 0.0;
  CHECK(build_noise_matrix(cold)(idx::p1, idx::p1) == cold.gamma1);
  CHECK(build_noise_matrix(cold)(idx::p2, idx::p2) == cold.gamma2);
}

TEST_CASE("initial covariance") {
  const CovarianceState d = CovarianceState::initial(0.05);
  CHECK(d.d(0, 0) == 0.5);
  CHECK(d.d(1, 1) == 0.5);
  for (int i = 2; i < 6; ++i) CHECK(d.d(i, i) == doctest::Approx(0.55));
  CHECK(d.asymmetry() == 0.0);
}

TEST_CASE("mean phonon number") {
  constexpr double kB = 1.380649e-23;
  constexpr double hbar = 1.054571817e-34;
  const double t = 1.0;
  const double omega = std::numbers::ln2 * kB * t / hbar;
  CHECK(mean_phonon_number(t, omega) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(std::round(100.0 * mean_phonon_number(1e-3, kReferencePhononFrequency)) == 28.0);
  CHECK(std::round(100.0 * mean_phonon_number(1e-2, kReferencePhononFrequency)) == 614.0);
  CHECK(mean_phonon_number(1e-9, kReferencePhononFrequency) == 0.0);

  CHECK_THROWS_AS(mean_phonon_number(0.0, 1.0), Error);
  CHECK_THROWS_AS(mean_phonon_number(1.0, -1.0), Error);
}

TEST_CASE("parameter validation names the field") {
  SystemParams p = fig2_params();
  p.kappa = 0.0;
  try {
    p.validate();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
    CHECK(std::string(e.what()).find("kappa") != std::string::npos);
  }
}
