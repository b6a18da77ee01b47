#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qsync/dynamics.hpp"
#include "qsync/measures.hpp"
#include "qsync/scenario.hpp"

namespace qsync {

// Exact header of the trajectory CSV. Column order is part of the file format.
inline constexpr const char* kTrajectoryHeader = "t,q1,p1,q2,p2,re_a,im_a,c1,c2,sg";

struct RunSummary {
  TimeWindow window;
  ErrorSample final_error;  // generalized errors at the last sample

  // Generalized errors over the analysis window.
  double mean_q_err = 0.0;
  double mean_p_err = 0.0;
  double mean_abs_q_err = 0.0;
  double mean_abs_p_err = 0.0;
  double mean_error_norm = 0.0;

  // Raw differences q1 - q2, p1 - p2 over the analysis window.
  double mean_q_diff = 0.0;
  double peak_to_peak_q_diff = 0.0;
  double mean_abs_p_diff = 0.0;

  // Earliest t after which |(q_err, p_err)| < 0.05 r holds to the end.
  std::optional<double> settling_time;

  std::optional<SyncAverage> sync;
  std::optional<LimitCycleStats> cycle1;
  std::optional<LimitCycleStats> cycle2;
  std::optional<NegativityPeak> negativity;
};

struct RunOutput {
  Trajectory trajectory;
  RunSummary summary;
};

// Initial mean state used by every run: empty cavity, mirrors at rest.
MeanState default_initial_state();

Trajectory simulate(const Scenario& scenario);
RunSummary summarize(const Scenario& scenario, const Trajectory& traj);
RunOutput run_scenario(const Scenario& scenario);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
std::string summary_json(const Scenario& scenario, const RunSummary& summary);

// Mean and sample standard deviation (0 for a single value).
struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};
Moments moments(std::span<const double> xs);

struct SweepRow {
  double value = 0.0;
  std::string status = "ok";
  Moments sg_avg;
  Moments lyap_max;
  Moments neg_max;
  Moments r;
};

// One row per axis value, in the order given. A failing point is reported in
// `status` and does not abort the sweep.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned jobs);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows, int replicas);

struct RobustnessRow {
  double sigma = 0.0;
  Moments r;
  int replicas = 0;
};

// R(sigma) over `replicas` distinct seeds per sigma. A sigma = 0 row is always
// present and first.
std::vector<RobustnessRow> robustness_study(const Scenario& scenario,
                                            std::span<const double> sigmas,
                                            int replicas, unsigned jobs);
void write_robustness_csv(std::ostream& out, std::span<const RobustnessRow> rows);

}  // namespace qsync
