#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qsync/control.hpp"
#include "qsync/model.hpp"

namespace qsync {

struct IntegratorConfig {
  double dt = 1e-3;
  double t_end = 500.0;
  std::int64_t output_stride = 100;
  bool record_covariance = true;

  // dt in (0, 0.01], t_end > 0, stride >= 1, t_end / dt representable.
  void validate() const;
  std::int64_t steps() const;

  bool operator==(const IntegratorConfig&) const = default;
};

struct DelaySample {
  double t = 0.0;
  double q2 = 0.0;
  double p2 = 0.0;
  double a_sq = 0.0;
};

// Fixed-capacity ring buffer of (t, q2, p2, |A|^2). The very first sample is
// kept separately and returned for any query before it (constant pre-history).
class DelayHistory {
 public:
  explicit DelayHistory(std::size_t capacity = 2);

  // Capacity covering tau plus a couple of steps of slack.
  static DelayHistory for_delay(double tau, double dt);

  // Throws Error(InvalidArgument) unless t is strictly after the newest sample.
  void append(const DelaySample& sample);

  // Linear interpolation between bracketing samples. Throws EmptyHistory when
  // nothing was appended, WindowTooShort when the bracket was already evicted
  // and InvalidArgument when t_query is past the newest sample.
  DelaySample lookup(double t_query) const;

  bool empty() const { return size_ == 0; }
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return ring_.size(); }
  const DelaySample& newest() const;
  const DelaySample& at(std::size_t i) const { return ring_[(head_ + i) % ring_.size()]; }

  // Moves every retained sample (and the origin) towards `base` by `factor`:
  // x <- base + factor (x - base). Both histories must share timestamps.
  void contract_toward(const DelayHistory& base, double factor);

 private:
  DelaySample& at_mut(std::size_t i) { return ring_[(head_ + i) % ring_.size()]; }

  std::vector<DelaySample> ring_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  std::optional<DelaySample> origin_;
};

// Linear interpolation over a strictly increasing time grid; queries before the
// first node return the first value. Shared by the delay buffer and the
// time-shift mappings in measures.
double interpolate_linear(std::span<const double> times,
                          std::span<const double> values, double t_query);

struct TrajectorySample {
  double t = 0.0;
  MeanState state;
  ControlValues control;
  std::optional<Mat6> covariance;
  std::optional<double> sync;  // S'_g; +inf when the error variances vanish
};

struct Trajectory {
  double dt = 0.0;
  std::int64_t output_stride = 1;
  std::vector<TrajectorySample> samples;

  double spacing() const { return dt * static_cast<double>(output_stride); }
  std::vector<double> times() const;
};

// Assembles what the controller reads at time t from the current state and, for
// the time-delay law, from the history at t - tau.
ControlReading make_reading(const MeanState& s, const ControlLaw& law,
                            const DelayHistory& history, double t);

// One classical RK4 step of the mean-field equations with the control held.
MeanState advance_mean(const SystemParams& params, const MeanState& s,
                       ControlValues c, double dt);

// Drift matrices at the four RK4 stages (t, t + dt/2, t + dt/2, t + dt).
using DriftStages = std::array<Mat6, 4>;

// One RK4 step of dD/dt = S D + D S^T + N for given stage drifts. Symmetrizes.
void advance_covariance(CovarianceState& d, const DriftStages& drift,
                        const Mat6& noise, double dt);

// One RK4 step of dD/dt = S D + D S^T + N, rebuilding S from the mean state at
// each RK4 stage. Returns the advanced mean state too, since the stages are
// shared. The covariance result is symmetrized.
MeanState advance_coupled(const SystemParams& params, const MeanState& s,
                          CovarianceState& d, ControlValues c, double dt);

struct StepResult {
  MeanState state;
  std::optional<CovarianceState> covariance;
  ControlValues control;
};

// Evaluates the control once at time t (zero-order hold), then advances the
// mean state and, if given, the covariance by dt. Throws NonFiniteError.
StepResult step(const SystemParams& params, const MeanState& s,
                const CovarianceState* d, Controller& controller,
                const DelayHistory& history, double t, double dt);

// Step-by-step driver that owns its history and controller. Used directly by
// the Lyapunov estimator, which needs two runs in lockstep.
class Simulator {
 public:
  Simulator(SystemParams params, Controller controller, MeanState init,
            std::optional<CovarianceState> d0, double dt);

  // Records the current sample into the history and computes the control for
  // the step starting now. Must be followed by advance().
  ControlValues prepare();
  void advance();

  double time() const { return static_cast<double>(index_) * dt_; }
  std::int64_t index() const { return index_; }
  const MeanState& state() const { return state_; }
  MeanState& mutable_state() { return state_; }
  const std::optional<CovarianceState>& covariance() const { return cov_; }
  const DelayHistory& history() const { return history_; }
  DelayHistory& mutable_history() { return history_; }
  const SystemParams& params() const { return params_; }

 private:
  SystemParams params_;
  Controller controller_;
  MeanState state_;
  std::optional<CovarianceState> cov_;
  double dt_;
  std::int64_t index_ = 0;
  DelayHistory history_;
  ControlValues control_;
  bool prepared_ = false;
};

// Runs from t = 0 to cfg.t_end. sigma > 0 perturbs every controller reading and
// output with seeded Gaussian noise. NonFiniteError carries the failure time.
Trajectory integrate(const SystemParams& params, const ControlLaw& law,
                     const MeanState& init, const CovarianceState& d0,
                     const IntegratorConfig& cfg, std::uint64_t seed,
                     double ctrl_noise_sigma = 0.0);

}  // namespace qsync
