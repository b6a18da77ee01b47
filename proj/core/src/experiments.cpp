#include "qsync/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "json_io.hpp"
#include "qsync/csv.hpp"
#include "qsync/errors.hpp"
#include "qsync/parallel.hpp"

namespace qsync {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kSettleFraction = 0.05;

nlohmann::ordered_json nullable(const std::optional<double>& x) {
  if (!x || !std::isfinite(*x)) return nullptr;
  return *x;
}

nlohmann::ordered_json cycle_json(const std::optional<LimitCycleStats>& c) {
  if (!c) return nullptr;
  return {{"r", c->r},
          {"period", c->period},
          {"q_center", c->q_center},
          {"p_center", c->p_center},
          {"window", {c->window.start, c->window.end}}};
}

}  // namespace

MeanState default_initial_state() { return {}; }

Trajectory simulate(const Scenario& sc) {
  return integrate(sc.params, sc.law, default_initial_state(),
                   CovarianceState::initial(sc.params.nbar), sc.integrator, sc.seed,
                   sc.noise_sigma);
}

RunSummary summarize(const Scenario& sc, const Trajectory& traj) {
  RunSummary out;
  out.window = sc.window();
  const MappingPair mapping = sc.mapping();
  const auto errors = first_order_errors(traj, mapping.h1, mapping.h2);
  if (errors.empty()) throw Error(ErrorKind::WindowTooShort, "no error samples");
  out.final_error = errors.back();

  std::size_t n = 0;
  for (const auto& e : errors) {
    if (!out.window.contains(e.t)) continue;
    out.mean_q_err += e.q_err;
    out.mean_p_err += e.p_err;
    out.mean_abs_q_err += std::abs(e.q_err);
    out.mean_abs_p_err += std::abs(e.p_err);
    out.mean_error_norm += std::hypot(e.q_err, e.p_err);
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::EmptyWindow, "no error samples inside the window");
  const auto nd = static_cast<double>(n);
  out.mean_q_err /= nd;
  out.mean_p_err /= nd;
  out.mean_abs_q_err /= nd;
  out.mean_abs_p_err /= nd;
  out.mean_error_norm /= nd;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::size_t m = 0;
  for (const auto& s : traj.samples) {
    if (!out.window.contains(s.t)) continue;
    const double dq = s.state.q1 - s.state.q2;
    out.mean_q_diff += dq;
    out.mean_abs_p_diff += std::abs(s.state.p1 - s.state.p2);
    lo = std::min(lo, dq);
    hi = std::max(hi, dq);
    ++m;
  }
  out.mean_q_diff /= static_cast<double>(m);
  out.mean_abs_p_diff /= static_cast<double>(m);
  out.peak_to_peak_q_diff = hi - lo;

  try {
    out.cycle1 = limit_cycle_stats(traj, 1, out.window);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoOscillation) throw;
  }
  try {
    out.cycle2 = limit_cycle_stats(traj, 2, out.window);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoOscillation) throw;
  }

  if (out.cycle1) {
    const double threshold = kSettleFraction * out.cycle1->r;
    std::optional<double> settle;
    for (const auto& e : errors) {
      if (std::hypot(e.q_err, e.p_err) < threshold) {
        if (!settle) settle = e.t;
      } else {
        settle.reset();
      }
    }
    out.settling_time = settle;
  }

  if (sc.integrator.record_covariance) {
    out.sync = time_averaged_sync(traj, out.window);
    out.negativity = max_negativity(traj, out.window);
  }
  return out;
}

RunOutput run_scenario(const Scenario& sc) {
  RunOutput out;
  out.trajectory = simulate(sc);
  out.summary = summarize(sc, out.trajectory);
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << kTrajectoryHeader << '\n';
  for (const auto& s : traj.samples) {
    out << csv::real(s.t) << ',' << csv::real(s.state.q1) << ',' << csv::real(s.state.p1)
        << ',' << csv::real(s.state.q2) << ',' << csv::real(s.state.p2) << ','
        << csv::real(s.state.a_re) << ',' << csv::real(s.state.a_im) << ','
        << csv::real(s.control.c1) << ',' << csv::real(s.control.c2) << ','
        << csv::real(s.sync) << '\n';
  }
}

std::string summary_json(const Scenario& sc, const RunSummary& s) {
  nlohmann::ordered_json j;
  j["name"] = sc.name;
  j["window"] = {s.window.start, s.window.end};
  j["final_errors"] = {{"t", s.final_error.t},
                       {"q_err", s.final_error.q_err},
                       {"p_err", s.final_error.p_err}};
  j["window_errors"] = {{"mean_q_err", s.mean_q_err},
                        {"mean_p_err", s.mean_p_err},
                        {"mean_abs_q_err", s.mean_abs_q_err},
                        {"mean_abs_p_err", s.mean_abs_p_err},
                        {"mean_error_norm", s.mean_error_norm},
                        {"mean_q_diff", s.mean_q_diff},
                        {"peak_to_peak_q_diff", s.peak_to_peak_q_diff},
                        {"mean_abs_p_diff", s.mean_abs_p_diff}};
  j["settling_time"] = nullable(s.settling_time);
  if (s.sync) {
    j["sync_measure"] = {{"mean", nullable(s.sync->mean)},
                         {"samples", s.sync->samples},
                         {"unbounded", s.sync->unbounded}};
  } else {
    j["sync_measure"] = nullptr;
  }
  j["limit_cycle"] = {{"oscillator1", cycle_json(s.cycle1)},
                      {"oscillator2", cycle_json(s.cycle2)}};
  if (s.negativity) {
    j["max_negativity"] = {{"max", s.negativity->max},
                           {"evaluated", s.negativity->evaluated},
                           {"nonphysical", s.negativity->nonphysical}};
  } else {
    j["max_negativity"] = nullptr;
  }
  j["scenario"] = detail::scenario_json(sc);
  return j.dump(2) + "\n";
}

Moments moments(std::span<const double> xs) {
  Moments m;
  if (xs.empty()) return {kNaN, kNaN};
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned jobs) {
  const std::size_t points = spec.values.size();
  const auto replicas = static_cast<std::size_t>(spec.replicas);

  struct ReplicaResult {
    double sg = kNaN;
    double neg = kNaN;
    double r = kNaN;
    std::string status = "ok";
  };
  struct PointResult {
    double lyap = kNaN;
    std::string status = "ok";
  };
  std::vector<ReplicaResult> runs(points * replicas);
  std::vector<PointResult> lyap(points);

  // Tasks [0, points) estimate exponents, the rest are (point, replica) runs.
  parallel_for(points + runs.size(), jobs, [&](std::size_t task) {
    if (task < points) {
      const Scenario sc = spec.at(spec.values[task]);
      IntegratorConfig cfg = sc.integrator;
      cfg.record_covariance = false;
      try {
        lyap[task].lyap = lyapunov_exponent(sc.params, sc.law, default_initial_state(),
                                            spec.lyapunov_eps, cfg);
      } catch (const Error& e) {
        lyap[task].status = std::string("failed:") + to_string(e.kind());
      }
      return;
    }
    const std::size_t k = task - points;
    const std::size_t point = k / replicas;
    const std::size_t replica = k % replicas;
    Scenario sc = spec.at(spec.values[point]);
    sc.integrator.record_covariance = true;
    sc.seed = spec.base.seed + replica;
    ReplicaResult& out = runs[k];
    try {
      const Trajectory traj = simulate(sc);
      const TimeWindow window = sc.window();
      out.sg = time_averaged_sync(traj, window).mean;
      const NegativityPeak peak = max_negativity(traj, window);
      out.neg = peak.max;
      if (peak.nonphysical > 0) out.status = "nonphysical:" + std::to_string(peak.nonphysical);
      try {
        out.r = limit_cycle_stats(traj, 1, window).r;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoOscillation) throw;
      }
    } catch (const Error& e) {
      out.status = std::string("failed:") + to_string(e.kind());
    }
  });

  std::vector<SweepRow> rows(points);
  for (std::size_t i = 0; i < points; ++i) {
    SweepRow& row = rows[i];
    row.value = spec.values[i];
    std::vector<double> sg, neg, r;
    for (std::size_t j = 0; j < replicas; ++j) {
      const ReplicaResult& rr = runs[i * replicas + j];
      if (rr.status != "ok" && row.status == "ok") row.status = rr.status;
      if (rr.status.rfind("failed", 0) == 0) row.status = rr.status;
      sg.push_back(rr.sg);
      neg.push_back(rr.neg);
      r.push_back(rr.r);
    }
    if (lyap[i].status != "ok" && row.status == "ok") row.status = lyap[i].status;
    row.sg_avg = moments(sg);
    row.neg_max = moments(neg);
    row.r = moments(r);
    row.lyap_max = {lyap[i].lyap, 0.0};
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows, int replicas) {
  if (replicas > 1) {
    out << "value,sg_avg,sg_avg_std,lyap_max,lyap_max_std,neg_max,neg_max_std,r,r_std,status\n";
    for (const auto& row : rows) {
      out << csv::real(row.value) << ',' << csv::real(row.sg_avg.mean) << ','
          << csv::real(row.sg_avg.stddev) << ',' << csv::real(row.lyap_max.mean) << ','
          << csv::real(row.lyap_max.stddev) << ',' << csv::real(row.neg_max.mean) << ','
          << csv::real(row.neg_max.stddev) << ',' << csv::real(row.r.mean) << ','
          << csv::real(row.r.stddev) << ',' << row.status << '\n';
    }
    return;
  }
  out << "value,sg_avg,lyap_max,neg_max,r,status\n";
  for (const auto& row : rows) {
    out << csv::real(row.value) << ',' << csv::real(row.sg_avg.mean) << ','
        << csv::real(row.lyap_max.mean) << ',' << csv::real(row.neg_max.mean) << ','
        << csv::real(row.r.mean) << ',' << row.status << '\n';
  }
}

std::vector<RobustnessRow> robustness_study(const Scenario& scenario,
                                            std::span<const double> sigmas,
                                            int replicas, unsigned jobs) {
  if (replicas < 1) throw Error(ErrorKind::InvalidArgument, "replicas must be >= 1");
  std::vector<double> levels{0.0};
  for (double s : sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw Error(ErrorKind::InvalidArgument, "sigma values must be finite and >= 0");
    }
    if (s != 0.0) levels.push_back(s);
  }

  Scenario base = scenario;
  base.integrator.record_covariance = false;
  base.noise_sigma = 0.0;
  const Trajectory clean = simulate(base);
  const TimeWindow window = base.window();
  const LimitCycleStats stats = limit_cycle_stats(clean, 1, window);
  const MappingPair mapping = base.mapping();

  const auto reps = static_cast<std::size_t>(replicas);
  std::vector<double> values(levels.size() * reps);
  parallel_for(values.size(), jobs, [&](std::size_t task) {
    Scenario noisy = base;
    noisy.noise_sigma = levels[task / reps];
    noisy.seed = base.seed + 1 + task % reps;
    values[task] = robustness(clean, simulate(noisy), stats, window, mapping);
  });

  std::vector<RobustnessRow> rows;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    rows.push_back({levels[i],
                    moments(std::span<const double>(values).subspan(i * reps, reps)),
                    replicas});
  }
  return rows;
}

void write_robustness_csv(std::ostream& out, std::span<const RobustnessRow> rows) {
  out << "sigma,r_mean,r_std,replicas\n";
  for (const auto& row : rows) {
    out << csv::real(row.sigma) << ',' << csv::real(row.r.mean) << ','
        << csv::real(row.r.stddev) << ',' << row.replicas << '\n';
  }
}

}  // namespace qsync
