#include "qsync/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qsync/errors.hpp"
#include "qsync/measures.hpp"

namespace qsync {
namespace {

constexpr double kMaxStep = 0.01;

DelaySample lerp(const DelaySample& a, const DelaySample& b, double t) {
  const double f = (t - a.t) / (b.t - a.t);
  return {t, a.q2 + f * (b.q2 - a.q2), a.p2 + f * (b.p2 - a.p2),
          a.a_sq + f * (b.a_sq - a.a_sq)};
}

void check_finite(const MeanState& s, const std::optional<CovarianceState>& d,
                  double t) {
  if (!s.is_finite()) {
    throw NonFiniteError(t, "mean state left the finite range in the step starting at t=" +
                                std::to_string(t) + "; reduce dt");
  }
  if (d && !d->is_finite()) {
    throw NonFiniteError(t, "covariance left the finite range in the step starting at t=" +
                                std::to_string(t) + "; reduce dt");
  }
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !(dt <= kMaxStep)) {
    throw Error(ErrorKind::InvalidArgument, "integrator.dt must lie in (0, 0.01]", "dt");
  }
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw Error(ErrorKind::InvalidArgument, "integrator.t_end must be finite and > 0", "t_end");
  }
  if (output_stride < 1) {
    throw Error(ErrorKind::InvalidArgument, "integrator.output_stride must be >= 1", "output_stride");
  }
  if (t_end / dt >= 9.0e18) {
    throw Error(ErrorKind::InvalidArgument, "integrator.t_end / dt overflows the step counter");
  }
}

std::int64_t IntegratorConfig::steps() const {
  return std::max<std::int64_t>(1, std::llround(t_end / dt));
}

DelayHistory::DelayHistory(std::size_t capacity) : ring_(std::max<std::size_t>(capacity, 2)) {}

DelayHistory DelayHistory::for_delay(double tau, double dt) {
  const auto span = static_cast<std::size_t>(std::ceil(tau / dt));
  return DelayHistory(span + 3);
}

const DelaySample& DelayHistory::newest() const {
  if (empty()) throw Error(ErrorKind::EmptyHistory, "delay history is empty");
  return at(size_ - 1);
}

void DelayHistory::append(const DelaySample& sample) {
  if (!empty() && !(sample.t > newest().t)) {
    throw Error(ErrorKind::InvalidArgument,
                "delay history timestamps must be strictly increasing");
  }
  if (!origin_) origin_ = sample;
  if (size_ < ring_.size()) {
    ring_[(head_ + size_) % ring_.size()] = sample;
    ++size_;
  } else {
    ring_[head_] = sample;
    head_ = (head_ + 1) % ring_.size();
  }
}

DelaySample DelayHistory::lookup(double t_query) const {
  if (empty()) throw Error(ErrorKind::EmptyHistory, "delay history is empty");
  const DelaySample& last = newest();
  if (t_query > last.t) {
    throw Error(ErrorKind::InvalidArgument, "delay lookup past the newest sample");
  }
  if (t_query <= origin_->t) return {t_query, origin_->q2, origin_->p2, origin_->a_sq};
  if (t_query == last.t) return last;
  if (t_query < at(0).t) {
    throw Error(ErrorKind::WindowTooShort, "delay lookup older than the retained history");
  }

  // First retained sample strictly after t_query.
  std::size_t lo = 0;
  std::size_t hi = size_ - 1;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (at(mid).t <= t_query) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lerp(at(lo), at(hi), t_query);
}

void DelayHistory::contract_toward(const DelayHistory& base, double factor) {
  if (base.size_ != size_) {
    throw Error(ErrorKind::InvalidArgument, "histories must hold the same samples");
  }
  auto pull = [factor](DelaySample& x, const DelaySample& b) {
    x.q2 = b.q2 + factor * (x.q2 - b.q2);
    x.p2 = b.p2 + factor * (x.p2 - b.p2);
    x.a_sq = b.a_sq + factor * (x.a_sq - b.a_sq);
  };
  for (std::size_t i = 0; i < size_; ++i) pull(at_mut(i), base.at(i));
  if (origin_ && base.origin_) pull(*origin_, *base.origin_);
}

double interpolate_linear(std::span<const double> times,
                          std::span<const double> values, double t_query) {
  if (times.empty() || times.size() != values.size()) {
    throw Error(ErrorKind::EmptyHistory, "interpolation grid is empty or mismatched");
  }
  if (t_query <= times.front()) return values.front();
  if (t_query >= times.back()) {
    if (t_query == times.back()) return values.back();
    throw Error(ErrorKind::InvalidArgument, "interpolation query past the last node");
  }
  const auto it = std::upper_bound(times.begin(), times.end(), t_query);
  const auto hi = static_cast<std::size_t>(it - times.begin());
  const std::size_t lo = hi - 1;
  const double f = (t_query - times[lo]) / (times[hi] - times[lo]);
  return values[lo] + f * (values[hi] - values[lo]);
}

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  t.reserve(samples.size());
  for (const auto& s : samples) t.push_back(s.t);
  return t;
}

ControlReading make_reading(const MeanState& s, const ControlLaw& law,
                            const DelayHistory& history, double t) {
  ControlReading r{s.q1, s.p1, s.q2, s.p2, s.intensity()};
  if (const auto* td = std::get_if<TimeDelayLaw>(&law)) {
    const DelaySample past = history.lookup(t - td->tau);
    r.q2d = past.q2;
    r.p2d = past.p2;
    r.a_sqd = past.a_sq;
  }
  return r;
}

MeanState advance_mean(const SystemParams& params, const MeanState& s,
                       ControlValues c, double dt) {
  const MeanState k1 = mean_field_deriv(params, s, c.c1, c.c2);
  const MeanState k2 = mean_field_deriv(params, s + (0.5 * dt) * k1, c.c1, c.c2);
  const MeanState k3 = mean_field_deriv(params, s + (0.5 * dt) * k2, c.c1, c.c2);
  const MeanState k4 = mean_field_deriv(params, s + dt * k3, c.c1, c.c2);
  return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void advance_covariance(CovarianceState& d, const DriftStages& drift,
                        const Mat6& noise, double dt) {
  auto rhs = [&](const Mat6& s, const Mat6& cov) -> Mat6 {
    const Mat6 sd = s * cov;
    return sd + sd.transpose() + noise;
  };
  const Mat6 d1 = rhs(drift[0], d.d);
  const Mat6 d2 = rhs(drift[1], d.d + (0.5 * dt) * d1);
  const Mat6 d3 = rhs(drift[2], d.d + (0.5 * dt) * d2);
  const Mat6 d4 = rhs(drift[3], d.d + dt * d3);
  d.d += (dt / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
  d.symmetrize();
}

MeanState advance_coupled(const SystemParams& params, const MeanState& s,
                          CovarianceState& d, ControlValues c, double dt) {
  const MeanState k1 = mean_field_deriv(params, s, c.c1, c.c2);
  const MeanState s2 = s + (0.5 * dt) * k1;
  const MeanState k2 = mean_field_deriv(params, s2, c.c1, c.c2);
  const MeanState s3 = s + (0.5 * dt) * k2;
  const MeanState k3 = mean_field_deriv(params, s3, c.c1, c.c2);
  const MeanState s4 = s + dt * k3;
  const MeanState k4 = mean_field_deriv(params, s4, c.c1, c.c2);

  const DriftStages drift = {build_drift_matrix(params, s, c.c1, c.c2),
                             build_drift_matrix(params, s2, c.c1, c.c2),
                             build_drift_matrix(params, s3, c.c1, c.c2),
                             build_drift_matrix(params, s4, c.c1, c.c2)};
  advance_covariance(d, drift, build_noise_matrix(params), dt);

  return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

StepResult step(const SystemParams& params, const MeanState& s,
                const CovarianceState* d, Controller& controller,
                const DelayHistory& history, double t, double dt) {
  StepResult out;
  out.control = controller.evaluate(params, make_reading(s, controller.law(), history, t), t);
  if (d != nullptr) {
    CovarianceState next = *d;
    out.state = advance_coupled(params, s, next, out.control, dt);
    out.covariance = next;
  } else {
    out.state = advance_mean(params, s, out.control, dt);
  }
  check_finite(out.state, out.covariance, t);
  return out;
}

Simulator::Simulator(SystemParams params, Controller controller, MeanState init,
                     std::optional<CovarianceState> d0, double dt)
    : params_(params),
      controller_(std::move(controller)),
      state_(init),
      cov_(std::move(d0)),
      dt_(dt),
      history_(controller_.needs_history()
                   ? DelayHistory::for_delay(std::get<TimeDelayLaw>(controller_.law()).tau, dt)
                   : DelayHistory(2)) {
  params_.validate();
  if (!(dt_ > 0.0) || !(dt_ <= kMaxStep)) {
    throw Error(ErrorKind::InvalidArgument, "integrator.dt must lie in (0, 0.01]");
  }
  check_finite(state_, cov_, 0.0);
}

ControlValues Simulator::prepare() {
  const double t = time();
  history_.append({t, state_.q2, state_.p2, state_.intensity()});
  control_ = controller_.evaluate(params_, make_reading(state_, controller_.law(), history_, t), t);
  prepared_ = true;
  return control_;
}

void Simulator::advance() {
  if (!prepared_) prepare();
  if (cov_) {
    state_ = advance_coupled(params_, state_, *cov_, control_, dt_);
  } else {
    state_ = advance_mean(params_, state_, control_, dt_);
  }
  check_finite(state_, cov_, time());
  ++index_;
  prepared_ = false;
}

Trajectory integrate(const SystemParams& params, const ControlLaw& law,
                     const MeanState& init, const CovarianceState& d0,
                     const IntegratorConfig& cfg, std::uint64_t seed,
                     double ctrl_noise_sigma) {
  cfg.validate();
  Simulator sim(params, Controller(law, ctrl_noise_sigma, seed), init,
                cfg.record_covariance ? std::optional<CovarianceState>(d0) : std::nullopt,
                cfg.dt);

  Trajectory traj;
  traj.dt = cfg.dt;
  traj.output_stride = cfg.output_stride;
  const std::int64_t steps = cfg.steps();
  traj.samples.reserve(static_cast<std::size_t>(steps / cfg.output_stride + 1));

  for (std::int64_t i = 0;; ++i) {
    const ControlValues c = sim.prepare();
    if (i % cfg.output_stride == 0) {
      TrajectorySample sample;
      sample.t = sim.time();
      sample.state = sim.state();
      sample.control = c;
      if (sim.covariance()) {
        sample.covariance = sim.covariance()->d;
        sample.sync = sync_measure(*sim.covariance());
      }
      traj.samples.push_back(std::move(sample));
    }
    if (i == steps) break;
    sim.advance();
  }
  return traj;
}

}  // namespace qsync
