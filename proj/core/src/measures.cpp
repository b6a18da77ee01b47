#include "qsync/measures.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qsync/errors.hpp"

namespace qsync {
namespace {

constexpr double kUnboundedBracket = 1e-15;
constexpr double kInf = std::numeric_limits<double>::infinity();

double det2(const Eigen::Matrix2d& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

// Applies h to a component series sampled on `times`.
double mapped(const GeneralizedMapping& h, std::span<const double> times,
              std::span<const double> series, std::size_t i, bool is_position) {
  switch (h.kind) {
    case GeneralizedMapping::Kind::Identity:
      return series[i];
    case GeneralizedMapping::Kind::ConstantShift:
      return is_position ? series[i] + h.value : series[i];
    case GeneralizedMapping::Kind::TimeShift:
      return interpolate_linear(times, series, times[i] - h.value);
  }
  return series[i];
}

std::vector<const TrajectorySample*> in_window(const Trajectory& traj, TimeWindow window) {
  if (traj.samples.empty() || window.start > traj.samples.back().t ||
      window.end < traj.samples.front().t || window.end < window.start) {
    throw Error(ErrorKind::WindowTooShort, "window lies outside the trajectory");
  }
  std::vector<const TrajectorySample*> out;
  for (const auto& s : traj.samples) {
    if (window.contains(s.t)) out.push_back(&s);
  }
  if (out.empty()) throw Error(ErrorKind::EmptyWindow, "no samples inside the window");
  return out;
}

// One trajectory of a lockstep pair; the generalized error channel is read
// through the delay history so that the time-delay mapping needs nothing extra.
struct MeanFieldPair {
  Simulator base;
  Simulator perturbed;
  MappingPair mapping;
  bool position_channel;

  double time() const { return base.time(); }

  double separation() const {
    const MeanState& a = base.state();
    const MeanState& b = perturbed.state();
    const double d[6] = {b.a_re - a.a_re, b.a_im - a.a_im, b.q1 - a.q1,
                         b.p1 - a.p1,     b.q2 - a.q2,     b.p2 - a.p2};
    double sum = 0.0;
    for (double x : d) sum += x * x;
    return std::sqrt(sum);
  }

  double error(const Simulator& sim) const {
    const double t = sim.time();
    const MeanState& s = sim.state();
    auto channel = [&](const GeneralizedMapping& h, int osc) {
      const bool delayed = h.kind == GeneralizedMapping::Kind::TimeShift;
      if (osc == 2 && delayed) {
        const DelaySample past = sim.history().lookup(t - h.value);
        return position_channel ? past.q2 : past.p2;
      }
      if (delayed) {
        throw Error(ErrorKind::InvalidArgument,
                    "time-shifted h1 is not supported by the Lyapunov estimator");
      }
      // Constant shifts cancel in the difference between the two runs.
      if (osc == 1) return position_channel ? s.q1 : s.p1;
      return position_channel ? s.q2 : s.p2;
    };
    return channel(mapping.h1, 1) - channel(mapping.h2, 2);
  }

  double gap() const { return error(perturbed) - error(base); }

  void contract(double factor) {
    MeanState& b = perturbed.mutable_state();
    const MeanState& a = base.state();
    b = a + factor * (b - a);
    perturbed.mutable_history().contract_toward(base.history(), factor);
  }

  void prepare() {
    base.prepare();
    perturbed.prepare();
  }

  void advance() {
    base.advance();
    perturbed.advance();
  }
};

}  // namespace

MappingPair default_mapping(const ControlLaw& law) {
  if (const auto* ce = std::get_if<ConstantErrorLaw>(&law)) {
    return {GeneralizedMapping::identity(), GeneralizedMapping::constant_shift(ce->c_minus)};
  }
  if (const auto* td = std::get_if<TimeDelayLaw>(&law)) {
    return {GeneralizedMapping::identity(), GeneralizedMapping::time_shift(td->tau)};
  }
  return {};
}

TimeWindow tail_window(double t_end) { return {0.5 * t_end, t_end}; }

std::vector<ErrorSample> first_order_errors(const Trajectory& traj,
                                            const GeneralizedMapping& h1,
                                            const GeneralizedMapping& h2) {
  const double lag = std::max(h1.delay(), h2.delay());
  if (traj.samples.empty() || traj.samples.back().t < lag) {
    throw Error(ErrorKind::WindowTooShort, "trajectory is shorter than the mapping delay");
  }

  const std::size_t n = traj.samples.size();
  std::vector<double> t(n), q1(n), p1(n), q2(n), p2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = traj.samples[i];
    t[i] = s.t;
    q1[i] = s.state.q1;
    p1[i] = s.state.p1;
    q2[i] = s.state.q2;
    p2[i] = s.state.p2;
  }

  std::vector<ErrorSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (t[i] < lag) continue;
    out.push_back({t[i], mapped(h1, t, q1, i, true) - mapped(h2, t, q2, i, true),
                   mapped(h1, t, p1, i, false) - mapped(h2, t, p2, i, false)});
  }
  return out;
}

double sync_measure(const CovarianceState& cov) {
  const Mat6& d = cov.d;
  const double bracket =
      0.5 * (d(idx::q1, idx::q1) + d(idx::q2, idx::q2) - 2.0 * d(idx::q1, idx::q2)) +
      0.5 * (d(idx::p1, idx::p1) + d(idx::p2, idx::p2) - 2.0 * d(idx::p1, idx::p2));
  if (bracket <= kUnboundedBracket) return kInf;
  return 1.0 / bracket;
}

SyncAverage time_averaged_sync(const Trajectory& traj, TimeWindow window) {
  SyncAverage avg;
  double sum = 0.0;
  for (const TrajectorySample* s : in_window(traj, window)) {
    if (!s->sync) continue;
    if (std::isinf(*s->sync)) {
      ++avg.unbounded;
    } else {
      sum += *s->sync;
      ++avg.samples;
    }
  }
  if (avg.samples == 0 && avg.unbounded == 0) {
    throw Error(ErrorKind::EmptyWindow, "no covariance samples inside the window");
  }
  avg.mean = avg.samples > 0 ? sum / static_cast<double>(avg.samples) : kInf;
  return avg;
}

LimitCycleStats limit_cycle_stats(const Trajectory& traj, int oscillator,
                                  TimeWindow window) {
  if (oscillator != 1 && oscillator != 2) {
    throw Error(ErrorKind::InvalidArgument, "oscillator must be 1 or 2");
  }
  const auto samples = in_window(traj, window);
  if (samples.size() < 2) throw Error(ErrorKind::EmptyWindow, "too few samples inside the window");
  std::vector<double> t, q, p;
  for (const auto* s : samples) {
    t.push_back(s->t);
    q.push_back(oscillator == 1 ? s->state.q1 : s->state.q2);
    p.push_back(oscillator == 1 ? s->state.p1 : s->state.p2);
  }

  auto upward_crossings = [&](double level) {
    std::vector<double> out;
    for (std::size_t i = 1; i < t.size(); ++i) {
      const double a = q[i - 1] - level;
      const double b = q[i] - level;
      if (a < 0.0 && b >= 0.0) out.push_back(t[i - 1] + (t[i] - t[i - 1]) * (-a) / (b - a));
    }
    return out;
  };
  // Trapezoidal time average of f(i) over [t0, t1], endpoints interpolated.
  auto average = [&](double t0, double t1, auto&& f) {
    auto at = [&](double tq) {
      const auto it = std::upper_bound(t.begin(), t.end(), tq);
      const std::size_t j = std::clamp<std::size_t>(it - t.begin(), 1, t.size() - 1);
      const double w = (tq - t[j - 1]) / (t[j] - t[j - 1]);
      return std::pair{j, (1.0 - w) * f(j - 1) + w * f(j)};
    };
    const auto [j0, f0] = at(t0);
    const auto [j1, f1] = at(t1);
    double sum = 0.0;
    double prev_t = t0;
    double prev_f = f0;
    for (std::size_t i = j0; i < j1; ++i) {
      sum += 0.5 * (prev_f + f(i)) * (t[i] - prev_t);
      prev_t = t[i];
      prev_f = f(i);
    }
    sum += 0.5 * (prev_f + f1) * (t1 - prev_t);
    return sum / (t1 - t0);
  };

  LimitCycleStats stats;
  stats.window = window;
  const double first_level = average(t.front(), t.back(), [&](std::size_t i) { return q[i]; });
  std::vector<double> crossings = upward_crossings(first_level);
  double t0 = t.front();
  double t1 = t.back();
  // Refine the centre over whole cycles so a partial cycle does not bias it.
  if (crossings.size() >= 2) {
    t0 = crossings.front();
    t1 = crossings.back();
  }
  stats.q_center = average(t0, t1, [&](std::size_t i) { return q[i]; });
  stats.p_center = average(t0, t1, [&](std::size_t i) { return p[i]; });
  crossings = upward_crossings(stats.q_center);
  if (crossings.size() < 3) {
    throw Error(ErrorKind::NoOscillation,
                "fewer than three upward zero crossings in the window (" +
                    std::to_string(crossings.size()) + ")");
  }
  stats.r = average(crossings.front(), crossings.back(), [&](std::size_t i) {
    return std::hypot(q[i] - stats.q_center, p[i] - stats.p_center);
  });
  stats.period = (crossings.back() - crossings.front()) /
                 static_cast<double>(crossings.size() - 1);
  return stats;
}

double robustness(const Trajectory& clean, const Trajectory& noisy,
                  const LimitCycleStats& stats, TimeWindow window,
                  const MappingPair& mapping) {
  if (!(stats.r > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "limit-cycle radius must be positive");
  }
  const auto e = first_order_errors(clean, mapping.h1, mapping.h2);
  const auto e_noisy = first_order_errors(noisy, mapping.h1, mapping.h2);

  std::vector<std::pair<const ErrorSample*, const ErrorSample*>> pairs;
  std::size_t j = 0;
  std::size_t clean_count = 0;
  std::size_t noisy_count = 0;
  for (const auto& s : e_noisy) noisy_count += window.contains(s.t) ? 1 : 0;
  for (const auto& s : e) {
    if (!window.contains(s.t)) continue;
    ++clean_count;
    while (j < e_noisy.size() && e_noisy[j].t < s.t) ++j;
    if (j == e_noisy.size() || e_noisy[j].t != s.t) {
      throw Error(ErrorKind::WindowMismatch, "clean and noisy runs are sampled differently");
    }
    pairs.emplace_back(&s, &e_noisy[j]);
  }
  if (clean_count != noisy_count) {
    throw Error(ErrorKind::WindowMismatch, "clean and noisy runs are sampled differently");
  }
  if (pairs.empty()) throw Error(ErrorKind::EmptyWindow, "no error samples inside the window");

  double sum = 0.0;
  for (const auto& [a, b] : pairs) {
    const double dq = (a->q_err - b->q_err) / std::numbers::sqrt2;
    const double dp = (a->p_err - b->p_err) / std::numbers::sqrt2;
    sum += std::hypot(dq, dp);
  }
  const double mean = sum / static_cast<double>(pairs.size());
  return 1.0 - mean / (std::numbers::sqrt2 * stats.r);
}

NegativityResult negativity(const CovarianceState& cov) {
  NegativityResult out;
  out.gamma = cov.d.block<4, 4>(idx::q1, idx::q1);
  const Eigen::Matrix2d a = out.gamma.block<2, 2>(0, 0);
  const Eigen::Matrix2d b = out.gamma.block<2, 2>(2, 2);
  const Eigen::Matrix2d c = out.gamma.block<2, 2>(0, 2);

  out.delta_gamma = det2(a) + det2(b) - 2.0 * det2(c);
  const double det_gamma = out.gamma.determinant();
  double disc = out.delta_gamma * out.delta_gamma - 4.0 * det_gamma;
  const double tol = 1e-12 * std::max(1.0, out.delta_gamma * out.delta_gamma);
  if (disc < -tol) {
    throw Error(ErrorKind::NonPhysical,
                "Delta(Gamma)^2 < 4 det(Gamma): covariance is not physical");
  }
  disc = std::max(disc, 0.0);
  // nu_-^2 nu_+^2 = det(Gamma); dividing avoids cancellation in Delta - sqrt(disc)
  // once the mechanical variances grow large.
  const double nu_plus_sq = 0.5 * (out.delta_gamma + std::sqrt(disc));
  const double nu_sq = nu_plus_sq > 0.0 ? det_gamma / nu_plus_sq : 0.0;
  if (!(nu_sq > 0.0)) {
    throw Error(ErrorKind::NonPhysical, "smallest symplectic eigenvalue is not positive");
  }
  out.nu_minus = std::sqrt(nu_sq);
  out.e_n = std::max(0.0, -std::log2(2.0 * out.nu_minus));
  return out;
}

NegativityPeak max_negativity(const Trajectory& traj, TimeWindow window) {
  NegativityPeak peak;
  bool any = false;
  for (const TrajectorySample* s : in_window(traj, window)) {
    if (!s->covariance) continue;
    any = true;
    try {
      peak.max = std::max(peak.max, negativity(CovarianceState{*s->covariance}).e_n);
      ++peak.evaluated;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonPhysical) throw;
      ++peak.nonphysical;
    }
  }
  if (!any) throw Error(ErrorKind::EmptyWindow, "no covariance samples inside the window");
  if (peak.evaluated == 0) {
    throw Error(ErrorKind::NonPhysical, "no physical covariance sample inside the window");
  }
  return peak;
}

double least_squares_slope(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size() || t.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "slope fit needs at least two points");
  }
  const auto n = static_cast<double>(t.size());
  double t_mean = 0.0;
  double y_mean = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    t_mean += t[i];
    y_mean += y[i];
  }
  t_mean /= n;
  y_mean /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sxy += (t[i] - t_mean) * (y[i] - y_mean);
    sxx += (t[i] - t_mean) * (t[i] - t_mean);
  }
  if (sxx == 0.0) throw Error(ErrorKind::InvalidArgument, "slope fit needs distinct times");
  return sxy / sxx;
}

double trace_exponent(const TangentTrace& trace, double t_from) {
  std::vector<double> t;
  std::vector<double> y;
  for (std::size_t i = 0; i < trace.t.size(); ++i) {
    if (trace.t[i] >= t_from) {
      t.push_back(trace.t[i]);
      y.push_back(trace.log_gap[i]);
    }
  }
  if (t.size() < 2) return -kInf;
  return least_squares_slope(t, y);
}

LyapunovResult lyapunov_exponents(const SystemParams& params, const ControlLaw& law,
                                  const MeanState& base_init, double eps,
                                  const IntegratorConfig& cfg) {
  if (!(eps >= 1e-8 && eps <= 1e-4)) {
    throw Error(ErrorKind::InvalidArgument, "Lyapunov eps must lie in [1e-8, 1e-4]");
  }
  cfg.validate();
  const MappingPair mapping = default_mapping(law);

  MeanState shifted = base_init;
  shifted.q2 += eps;
  shifted.p2 += eps;

  auto run_channel = [&](bool position) {
    MeanFieldPair pair{Simulator(params, Controller(law, 0.0, 0), base_init, std::nullopt, cfg.dt),
                       Simulator(params, Controller(law, 0.0, 0), shifted, std::nullopt, cfg.dt),
                       mapping, position};
    const TangentTrace trace = benettin_trace(pair, eps, cfg.steps(), cfg.output_stride);
    return trace_exponent(trace, 0.5 * cfg.t_end);
  };

  return {run_channel(true), run_channel(false)};
}

}  // namespace qsync
