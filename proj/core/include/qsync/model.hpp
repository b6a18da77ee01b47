#pragma once

#include <Eigen/Core>

#include <complex>

namespace qsync {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat4 = Eigen::Matrix<double, 4, 4>;

// Physical constants of the two-mirror optomechanical cavity, in units of the
// cavity detuning (delta = 1 is the reference scale).
struct SystemParams {
  double delta = 1.0;
  double omega_m1 = 1.0;
  double omega_m2 = 1.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double drive = 0.0;  // E
  double kappa = 1.0;
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double nbar = 0.0;  // bath mean phonon number

  // Throws Error(InvalidArgument) naming the offending field.
  void validate() const;

  bool operator==(const SystemParams&) const = default;
};

// Classical expectation values: complex cavity amplitude A = a_re + i a_im and
// the two oscillator quadratures.
struct MeanState {
  double a_re = 0.0;
  double a_im = 0.0;
  double q1 = 0.0;
  double p1 = 0.0;
  double q2 = 0.0;
  double p2 = 0.0;

  std::complex<double> amplitude() const { return {a_re, a_im}; }
  double intensity() const { return a_re * a_re + a_im * a_im; }
  bool is_finite() const;

  MeanState& operator+=(const MeanState& o);
  friend MeanState operator+(MeanState a, const MeanState& b) { return a += b; }
  friend MeanState operator-(MeanState a, const MeanState& b) { return a += (-1.0) * b; }
  friend MeanState operator*(double s, MeanState a);

  bool operator==(const MeanState&) const = default;
};

// Symmetrized second moments of (dx, dy, dq1, dp1, dq2, dp2).
struct CovarianceState {
  Mat6 d = Mat6::Identity() * 0.5;

  // Vacuum cavity, thermal mirrors at occupation nbar.
  static CovarianceState initial(double nbar);

  double asymmetry() const { return (d - d.transpose()).cwiseAbs().maxCoeff(); }
  void symmetrize() { d = 0.5 * (d + d.transpose()); }
  bool is_finite() const { return d.allFinite(); }
};

// Indices into the fluctuation vector.
namespace idx {
inline constexpr int x = 0;
inline constexpr int y = 1;
inline constexpr int q1 = 2;
inline constexpr int p1 = 3;
inline constexpr int q2 = 4;
inline constexpr int p2 = 5;
}  // namespace idx

// Time derivative of the mean-field equations with control factors
// [1 + c_j] on the mechanical potential terms.
MeanState mean_field_deriv(const SystemParams& params, const MeanState& s,
                           double c1, double c2);

// Drift matrix S of the linearized fluctuation dynamics du/dt = S u + noise.
Mat6 build_drift_matrix(const SystemParams& params, const MeanState& s,
                        double c1, double c2);

// diag(kappa, kappa, 0, gamma1 (2 nbar + 1), 0, gamma2 (2 nbar + 1)).
Mat6 build_noise_matrix(const SystemParams& params);

// Bose-Einstein occupation [exp(hbar omega / kB T) - 1]^-1. Returns 0 once the
// exponent exceeds 700.
double mean_phonon_number(double temperature_kelvin, double omega_rad_per_s);

// Mechanical frequency (rad/s) used to convert a bath temperature to nbar.
// Chosen so that 1 mK -> 0.28 and 10 mK -> 6.14 when rounded to two decimals.
extern const double kReferencePhononFrequency;

}  // namespace qsync
