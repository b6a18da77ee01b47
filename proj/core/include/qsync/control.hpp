#pragma once

#include <cstdint>
#include <random>
#include <variant>

#include "qsync/model.hpp"

namespace qsync {

struct NoControl {
  bool operator==(const NoControl&) const = default;
};

// Constant-error synchronization: drives p1 - p2 -> 0 while the guard
// |omega_m2 q2 - omega_m1 q1| > c_minus keeps the denominator away from zero.
// The single output is applied to both oscillators.
struct ConstantErrorLaw {
  double gain = 2.0;  // k
  double c_minus = 0.0;
  bool operator==(const ConstantErrorLaw&) const = default;
};

// Time-delay synchronization: drives p1(t) - p2(t - tau) -> 0 through C1 alone,
// saturated at +-c_max. C2 is identically zero.
struct TimeDelayLaw {
  double gain = 2.0;  // k
  double tau = 0.0;
  double c_max = 1.0;
  bool operator==(const TimeDelayLaw&) const = default;
};

using ControlLaw = std::variant<NoControl, ConstantErrorLaw, TimeDelayLaw>;

// Throws Error(InvalidArgument) on k <= 0, c_minus < 0, tau < 0 or c_max <= 0.
void validate(const ControlLaw& law);

// What the controller measures at time t. The delayed fields are only read by
// the time-delay law. After noise injection a_sq may be negative.
struct ControlReading {
  double q1 = 0.0;
  double p1 = 0.0;
  double q2 = 0.0;
  double p2 = 0.0;
  double a_sq = 0.0;
  double q2d = 0.0;
  double p2d = 0.0;
  double a_sqd = 0.0;

  bool operator==(const ControlReading&) const = default;
};

// Seeded Gaussian source shared by all noise injections of one run.
class GaussianNoise {
 public:
  explicit GaussianNoise(std::uint64_t seed) : engine_(seed) {}

  // Returns `mean` unchanged when sigma == 0.
  double sample(double mean, double sigma);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> unit_{0.0, 1.0};
};

// Requires gamma1 == gamma2 (checked by the caller at scenario load).
double constant_error_control(const ControlReading& r, const SystemParams& params,
                              double k, double c_minus);

// Returns 0 for t < tau. `previous` is returned unchanged when q1 == 0.
double time_delay_control(const ControlReading& r, const SystemParams& params,
                          double k, double tau, double c_max, double t,
                          double previous);

ControlReading perturb_reading(const ControlReading& r, double sigma,
                               GaussianNoise& noise);
double perturb_output(double c, double sigma, GaussianNoise& noise);

// Control factors applied to the two oscillators over one integrator step.
struct ControlValues {
  double c1 = 0.0;
  double c2 = 0.0;
};

// Stateful wrapper: remembers the last time-delay output (for the q1 == 0 hold)
// and applies measurement/actuation noise when sigma > 0.
class Controller {
 public:
  Controller(ControlLaw law, double sigma, std::uint64_t seed);

  const ControlLaw& law() const { return law_; }
  bool needs_history() const { return std::holds_alternative<TimeDelayLaw>(law_); }

  // `reading` must already contain delayed quantities for the time-delay law.
  ControlValues evaluate(const SystemParams& params, ControlReading reading,
                         double t);

 private:
  ControlLaw law_;
  double sigma_;
  GaussianNoise noise_;
  double previous_ = 0.0;
};

}  // namespace qsync
