#include "qsync/model.hpp"

#include <cmath>
#include <string>

#include "qsync/errors.hpp"

namespace qsync {
namespace {

// CODATA 2018 exact values.
constexpr double kHbar = 1.054571817e-34;      // J s
constexpr double kBoltzmann = 1.380649e-23;    // J / K
constexpr double kMaxExponent = 700.0;

void require(bool ok, const char* field, const char* rule) {
  if (!ok) {
    throw Error(ErrorKind::InvalidArgument,
                std::string("SystemParams.") + field + " must be " + rule, field);
  }
}

}  // namespace

const double kReferencePhononFrequency =
    std::log1p(1.0 / 6.14) * kBoltzmann * 0.01 / kHbar;

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::EmptyHistory: return "EmptyHistory";
    case ErrorKind::WindowTooShort: return "WindowTooShort";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::NonPhysical: return "NonPhysical";
    case ErrorKind::NoOscillation: return "NoOscillation";
    case ErrorKind::WindowMismatch: return "WindowMismatch";
    case ErrorKind::Config: return "ConfigError";
  }
  return "Unknown";
}

void SystemParams::validate() const {
  require(std::isfinite(delta), "delta", "finite");
  require(std::isfinite(g1), "g1", "finite");
  require(std::isfinite(g2), "g2", "finite");
  require(std::isfinite(drive) && drive >= 0.0, "E", "finite and >= 0");
  require(std::isfinite(omega_m1) && omega_m1 > 0.0, "omega_m1", "finite and > 0");
  require(std::isfinite(omega_m2) && omega_m2 > 0.0, "omega_m2", "finite and > 0");
  require(std::isfinite(kappa) && kappa > 0.0, "kappa", "finite and > 0");
  require(std::isfinite(gamma1) && gamma1 > 0.0, "gamma1", "finite and > 0");
  require(std::isfinite(gamma2) && gamma2 > 0.0, "gamma2", "finite and > 0");
  require(std::isfinite(nbar) && nbar >= 0.0, "nbar", "finite and >= 0");
}

bool MeanState::is_finite() const {
  return std::isfinite(a_re) && std::isfinite(a_im) && std::isfinite(q1) &&
         std::isfinite(p1) && std::isfinite(q2) && std::isfinite(p2);
}

MeanState& MeanState::operator+=(const MeanState& o) {
  a_re += o.a_re;
  a_im += o.a_im;
  q1 += o.q1;
  p1 += o.p1;
  q2 += o.q2;
  p2 += o.p2;
  return *this;
}

MeanState operator*(double s, MeanState a) {
  a.a_re *= s;
  a.a_im *= s;
  a.q1 *= s;
  a.p1 *= s;
  a.q2 *= s;
  a.p2 *= s;
  return a;
}

CovarianceState CovarianceState::initial(double nbar) {
  CovarianceState c;
  c.d.setZero();
  c.d(idx::x, idx::x) = 0.5;
  c.d(idx::y, idx::y) = 0.5;
  for (int i = idx::q1; i <= idx::p2; ++i) c.d(i, i) = nbar + 0.5;
  return c;
}

MeanState mean_field_deriv(const SystemParams& params, const MeanState& s,
                           double c1, double c2) {
  // dA/dt = (-kappa + i (delta + g1 q1 + g2 q2)) A + E
  const double rotation = params.delta + params.g1 * s.q1 + params.g2 * s.q2;
  const double intensity = s.intensity();

  MeanState ds;
  ds.a_re = -params.kappa * s.a_re - rotation * s.a_im + params.drive;
  ds.a_im = -params.kappa * s.a_im + rotation * s.a_re;
  ds.q1 = params.omega_m1 * s.p1;
  ds.p1 = -params.omega_m1 * (1.0 + c1) * s.q1 - params.gamma1 * s.p1 +
          params.g1 * intensity;
  ds.q2 = params.omega_m2 * s.p2;
  ds.p2 = -params.omega_m2 * (1.0 + c2) * s.q2 - params.gamma2 * s.p2 +
          params.g2 * intensity;
  return ds;
}

Mat6 build_drift_matrix(const SystemParams& params, const MeanState& s,
                        double c1, double c2) {
  const double rotation = params.delta + params.g1 * s.q1 + params.g2 * s.q2;
  const double r1 = std::sqrt(2.0) * params.g1;
  const double r2 = std::sqrt(2.0) * params.g2;

  Mat6 m = Mat6::Zero();
  m(0, 0) = -params.kappa;
  m(0, 1) = -rotation;
  m(0, 2) = -r1 * s.a_im;
  m(0, 4) = -r2 * s.a_im;

  m(1, 0) = rotation;
  m(1, 1) = -params.kappa;
  m(1, 2) = r1 * s.a_re;
  m(1, 4) = r2 * s.a_re;

  m(2, 3) = params.omega_m1;

  m(3, 0) = r1 * s.a_re;
  m(3, 1) = r1 * s.a_im;
  m(3, 2) = -params.omega_m1 * (1.0 + c1);
  m(3, 3) = -params.gamma1;

  m(4, 5) = params.omega_m2;

  m(5, 0) = r2 * s.a_re;
  m(5, 1) = r2 * s.a_im;
  m(5, 4) = -params.omega_m2 * (1.0 + c2);
  m(5, 5) = -params.gamma2;
  return m;
}

Mat6 build_noise_matrix(const SystemParams& params) {
  const double thermal = 2.0 * params.nbar + 1.0;
  Mat6 n = Mat6::Zero();
  n(0, 0) = params.kappa;
  n(1, 1) = params.kappa;
  n(3, 3) = params.gamma1 * thermal;
  n(5, 5) = params.gamma2 * thermal;
  return n;
}

double mean_phonon_number(double temperature_kelvin, double omega_rad_per_s) {
  if (!(temperature_kelvin > 0.0) || !(omega_rad_per_s > 0.0)) {
    throw Error(ErrorKind::InvalidArgument,
                "mean_phonon_number requires temperature > 0 and omega > 0");
  }
  const double x = kHbar * omega_rad_per_s / (kBoltzmann * temperature_kelvin);
  if (x > kMaxExponent) return 0.0;
  return 1.0 / std::expm1(x);
}

}  // namespace qsync
