#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "qsync/dynamics.hpp"
#include "qsync/model.hpp"

namespace qsync {

// h(x) applied to one oscillator's (q, p) series. ConstantShift translates the
// position only (a translation along q in phase space); TimeShift reads the
// series at t - tau.
struct GeneralizedMapping {
  enum class Kind { Identity, ConstantShift, TimeShift };

  Kind kind = Kind::Identity;
  double value = 0.0;

  static GeneralizedMapping identity() { return {}; }
  static GeneralizedMapping constant_shift(double c) { return {Kind::ConstantShift, c}; }
  static GeneralizedMapping time_shift(double tau) { return {Kind::TimeShift, tau}; }

  double delay() const { return kind == Kind::TimeShift ? value : 0.0; }

  bool operator==(const GeneralizedMapping&) const = default;
};

struct MappingPair {
  GeneralizedMapping h1;
  GeneralizedMapping h2;
  bool operator==(const MappingPair&) const = default;
};

// identity/identity, identity/shift(c_minus), identity/delay(tau).
MappingPair default_mapping(const ControlLaw& law);

struct TimeWindow {
  double start = 0.0;
  double end = 0.0;
  bool contains(double t) const { return t >= start && t <= end; }
  bool operator==(const TimeWindow&) const = default;
};

// [t_end / 2, t_end].
TimeWindow tail_window(double t_end);

struct ErrorSample {
  double t = 0.0;
  double q_err = 0.0;
  double p_err = 0.0;
};

// q_err(t) = h1(q1)(t) - h2(q2)(t), likewise p_err. Samples start at the
// largest mapping delay. Throws WindowTooShort if the trajectory is shorter.
std::vector<ErrorSample> first_order_errors(const Trajectory& traj,
                                            const GeneralizedMapping& h1,
                                            const GeneralizedMapping& h2);

// Second-order measure {[D33 + D55 - 2 D35]/2 + [D44 + D66 - 2 D46]/2}^-1 over the
// mechanical block. Returns +infinity when the bracket is <= 1e-15.
double sync_measure(const CovarianceState& d);
inline double sync_measure(const Mat6& d) { return sync_measure(CovarianceState{d}); }

struct SyncAverage {
  double mean = 0.0;
  std::size_t samples = 0;    // bounded samples contributing to the mean
  std::size_t unbounded = 0;  // samples excluded as +infinity
};

// Mean S'_g over recorded covariances inside the window. Throws EmptyWindow.
SyncAverage time_averaged_sync(const Trajectory& traj, TimeWindow window);

struct LimitCycleStats {
  double r = 0.0;       // mean distance to the centroid
  double period = 0.0;  // mean spacing of upward zero crossings
  double q_center = 0.0;
  double p_center = 0.0;
  TimeWindow window;
};

// oscillator is 1 or 2. Throws NoOscillation below three upward crossings.
LimitCycleStats limit_cycle_stats(const Trajectory& traj, int oscillator,
                                  TimeWindow window);

// Time-averaged R = 1 - <|e - e'|> / (sqrt(2) r), where e = (q_-, p_-) are the
// generalized errors scaled by 1/sqrt(2) and primes refer to the noisy run.
// Throws WindowMismatch when the runs do not share sample times in the window.
double robustness(const Trajectory& clean, const Trajectory& noisy,
                  const LimitCycleStats& stats, TimeWindow window,
                  const MappingPair& mapping);

struct NegativityResult {
  Mat4 gamma = Mat4::Zero();
  double delta_gamma = 0.0;
  double nu_minus = 0.0;
  double e_n = 0.0;
};

// Gaussian negativity of the two mirrors. E_n = max(0, -log2(2 nu_minus)) so
// that a product of vacua gives zero with vacuum variance 1/2.
// Throws NonPhysical if Delta^2 < 4 det(Gamma) beyond round-off.
NegativityResult negativity(const CovarianceState& d);

struct NegativityPeak {
  double max = 0.0;
  std::size_t evaluated = 0;
  std::size_t nonphysical = 0;  // samples skipped as NonPhysical
};

// Max E_n over recorded covariances in the window. Samples whose covariance has
// lost positivity to round-off are skipped and counted. Throws EmptyWindow, or
// NonPhysical when no sample could be evaluated.
NegativityPeak max_negativity(const Trajectory& traj, TimeWindow window);

// Least-squares slope of y against t.
double least_squares_slope(std::span<const double> t, std::span<const double> y);

// ln|delta o(t)| with the renormalization offsets already folded in.
struct TangentTrace {
  std::vector<double> t;
  std::vector<double> log_gap;
};

// Two-trajectory (Benettin) tracking of one observable gap. Whenever the full
// state separation leaves [1e-3 eps, 1e3 eps] the perturbed run is pulled back
// to distance eps and the log factor accumulated.
//
// Pair must provide:
//   double time() const;           double separation() const;
//   double gap() const;            void contract(double factor);
//   void prepare();                void advance();
// prepare() runs before gap() at each step, advance() moves one dt.
template <class Pair>
TangentTrace benettin_trace(Pair& pair, double eps, std::int64_t steps,
                            std::int64_t stride) {
  constexpr double kUpper = 1e3;
  constexpr double kLower = 1e-3;
  TangentTrace trace;
  double offset = 0.0;
  for (std::int64_t i = 0;; ++i) {
    const double sep = pair.separation();
    if (sep > kUpper * eps || (sep > 0.0 && sep < kLower * eps)) {
      const double factor = eps / sep;
      pair.contract(factor);
      offset -= std::log(factor);
    }
    pair.prepare();
    if (i % stride == 0) {
      const double g = std::abs(pair.gap());
      if (g > 0.0 && std::isfinite(g)) {
        trace.t.push_back(pair.time());
        trace.log_gap.push_back(std::log(g) + offset);
      }
    }
    if (i == steps) break;
    pair.advance();
  }
  return trace;
}

// Slope of the trace over t >= t_from; -infinity when no gap was resolvable.
double trace_exponent(const TangentTrace& trace, double t_from);

struct LyapunovResult {
  double q = 0.0;
  double p = 0.0;
  double max() const { return std::max(q, p); }
};

// Largest Lyapunov exponents of the generalized errors on the mean-field
// system: the perturbed run starts with q2, p2 offset by eps, slopes are fit
// over [t_end / 2, t_end]. eps must lie in [1e-8, 1e-4].
LyapunovResult lyapunov_exponents(const SystemParams& params, const ControlLaw& law,
                                  const MeanState& base_init, double eps,
                                  const IntegratorConfig& cfg);

inline double lyapunov_exponent(const SystemParams& params, const ControlLaw& law,
                                const MeanState& base_init, double eps,
                                const IntegratorConfig& cfg) {
  return lyapunov_exponents(params, law, base_init, eps, cfg).max();
}

}  // namespace qsync
