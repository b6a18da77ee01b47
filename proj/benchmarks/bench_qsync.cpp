#include <benchmark/benchmark.h>

#include "qsync/qsync.hpp"

namespace {

qsync::SystemParams reference_params() {
  qsync::SystemParams p;
  p.omega_m1 = 1.0;
  p.omega_m2 = 1.005;
  p.g1 = 0.008;
  p.g2 = 0.005;
  p.drive = 10.0;
  p.kappa = 0.15;
  p.gamma1 = p.gamma2 = 0.005;
  p.nbar = 0.05;
  return p;
}

qsync::MeanState some_state() { return {12.0, -30.0, 2.5, -0.4, -0.8, 1.1}; }

}  // namespace

static void BM_DriftMatrix(benchmark::State& state) {
  const auto p = reference_params();
  const auto s = some_state();
  for (auto _ : state) benchmark::DoNotOptimize(qsync::build_drift_matrix(p, s, -0.3, -0.3));
}
BENCHMARK(BM_DriftMatrix);

static void BM_StepMean(benchmark::State& state) {
  const auto p = reference_params();
  auto s = some_state();
  for (auto _ : state) {
    s = qsync::advance_mean(p, s, {-0.3, -0.3}, 1e-3);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_StepMean);

static void BM_StepCoupled(benchmark::State& state) {
  const auto p = reference_params();
  auto s = some_state();
  auto d = qsync::CovarianceState::initial(p.nbar);
  for (auto _ : state) {
    s = qsync::advance_coupled(p, s, d, {-0.3, -0.3}, 1e-3);
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_StepCoupled);

static void BM_Negativity(benchmark::State& state) {
  qsync::CovarianceState d = qsync::CovarianceState::initial(0.05);
  d.d(2, 4) = d.d(4, 2) = 0.2;
  for (auto _ : state) benchmark::DoNotOptimize(qsync::negativity(d));
}
BENCHMARK(BM_Negativity);

static void BM_IntegrateConstantError(benchmark::State& state) {
  const auto p = reference_params();
  qsync::IntegratorConfig cfg;
  cfg.t_end = 50.0;
  cfg.record_covariance = state.range(0) != 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qsync::integrate(p, qsync::ConstantErrorLaw{2.0, 3.0}, {},
                                              qsync::CovarianceState::initial(p.nbar), cfg, 1));
  }
  state.SetItemsProcessed(state.iterations() * cfg.steps());
}
BENCHMARK(BM_IntegrateConstantError)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_IntegrateTimeDelay(benchmark::State& state) {
  const auto p = reference_params();
  qsync::IntegratorConfig cfg;
  cfg.t_end = 50.0;
  cfg.record_covariance = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qsync::integrate(p, qsync::TimeDelayLaw{2.0, 5.0, 1.0}, {},
                                              qsync::CovarianceState::initial(p.nbar), cfg, 1));
  }
  state.SetItemsProcessed(state.iterations() * cfg.steps());
}
BENCHMARK(BM_IntegrateTimeDelay)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
