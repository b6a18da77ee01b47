#include "qsync/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qsync/errors.hpp"

namespace qsync {

void validate(const ControlLaw& law) {
  auto fail = [](const char* field, const char* rule) {
    throw Error(ErrorKind::InvalidArgument, std::string("control.") + field + " must be " + rule, field);
  };
  if (const auto* ce = std::get_if<ConstantErrorLaw>(&law)) {
    if (!(ce->gain > 0.0) || !std::isfinite(ce->gain)) fail("k", "> 0");
    if (!(ce->c_minus >= 0.0) || !std::isfinite(ce->c_minus)) fail("c_minus", ">= 0");
  } else if (const auto* td = std::get_if<TimeDelayLaw>(&law)) {
    if (!(td->gain > 0.0) || !std::isfinite(td->gain)) fail("k", "> 0");
    if (!(td->tau >= 0.0) || !std::isfinite(td->tau)) fail("tau", ">= 0");
    if (!(td->c_max > 0.0) || !std::isfinite(td->c_max)) fail("c_max", "> 0");
  }
}

double GaussianNoise::sample(double mean, double sigma) {
  if (sigma == 0.0) return mean;
  return mean + sigma * unit_(engine_);
}

double constant_error_control(const ControlReading& r, const SystemParams& params,
                              double k, double c_minus) {
  const double gap = params.omega_m2 * r.q2 - params.omega_m1 * r.q1;
  if (!(std::abs(gap) > c_minus)) return 0.0;
  const double gamma = params.gamma1;
  const double numerator = (gamma - k) * (r.p1 - r.p2) - (params.g1 - params.g2) * r.a_sq;
  return numerator / gap - 1.0;
}

double time_delay_control(const ControlReading& r, const SystemParams& params,
                          double k, double tau, double c_max, double t,
                          double previous) {
  if (t < tau) return 0.0;
  if (r.q1 == 0.0) return previous;
  const double gamma = params.gamma1;
  const double numerator = (gamma - k) * (r.p1 - r.p2d) - params.g1 * r.a_sq +
                           params.g2 * r.a_sqd - params.omega_m2 * r.q2d;
  const double raw = numerator / (-params.omega_m1 * r.q1) - 1.0;
  return std::clamp(raw, -c_max, c_max);
}

ControlReading perturb_reading(const ControlReading& r, double sigma,
                               GaussianNoise& noise) {
  if (sigma == 0.0) return r;
  ControlReading out;
  out.q1 = noise.sample(r.q1, sigma);
  out.p1 = noise.sample(r.p1, sigma);
  out.q2 = noise.sample(r.q2, sigma);
  out.p2 = noise.sample(r.p2, sigma);
  out.a_sq = noise.sample(r.a_sq, sigma);
  out.q2d = noise.sample(r.q2d, sigma);
  out.p2d = noise.sample(r.p2d, sigma);
  out.a_sqd = noise.sample(r.a_sqd, sigma);
  return out;
}

double perturb_output(double c, double sigma, GaussianNoise& noise) {
  return noise.sample(c, sigma);
}

Controller::Controller(ControlLaw law, double sigma, std::uint64_t seed)
    : law_(std::move(law)), sigma_(sigma), noise_(seed) {
  validate(law_);
  if (!(sigma_ >= 0.0) || !std::isfinite(sigma_)) {
    throw Error(ErrorKind::InvalidArgument, "noise sigma must be finite and >= 0");
  }
}

ControlValues Controller::evaluate(const SystemParams& params,
                                   ControlReading reading, double t) {
  if (std::holds_alternative<NoControl>(law_)) return {};

  reading = perturb_reading(reading, sigma_, noise_);

  if (const auto* ce = std::get_if<ConstantErrorLaw>(&law_)) {
    const double c = perturb_output(
        constant_error_control(reading, params, ce->gain, ce->c_minus), sigma_, noise_);
    return {c, c};
  }

  const auto& td = std::get<TimeDelayLaw>(law_);
  previous_ = time_delay_control(reading, params, td.gain, td.tau, td.c_max, t, previous_);
  return {perturb_output(previous_, sigma_, noise_), 0.0};
}

}  // namespace qsync
