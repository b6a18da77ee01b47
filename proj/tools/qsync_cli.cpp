// qsync: run scenarios, parameter sweeps and robustness studies.
//
//   qsync [--out-dir DIR] [--jobs N] [--seed S] run <scenario.json>
//   qsync sweep <sweep.json>
//   qsync robustness <scenario.json> --sigmas 0.01,0.02 --replicas 20
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qsync/qsync.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct GlobalOptions {
  std::string out_dir = ".";
  unsigned jobs = qsync::default_jobs();
  std::optional<std::uint64_t> seed;
};

std::ofstream open_output(const GlobalOptions& g, const std::string& file) {
  fs::create_directories(g.out_dir);
  const fs::path path = fs::path(g.out_dir) / file;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw qsync::ConfigError("--out-dir", "cannot write " + path.string());
  return out;
}

int cmd_run(const GlobalOptions& g, const std::string& file) {
  qsync::Scenario sc = qsync::load_scenario(file);
  if (g.seed) sc.seed = *g.seed;

  const qsync::RunOutput result = qsync::run_scenario(sc);
  {
    auto out = open_output(g, sc.name + "_traj.csv");
    qsync::write_trajectory_csv(out, result.trajectory);
  }
  {
    auto out = open_output(g, sc.name + "_summary.json");
    out << qsync::summary_json(sc, result.summary);
  }

  const auto& s = result.summary;
  std::cout << sc.name << ": window [" << s.window.start << ", " << s.window.end << "]\n"
            << "  mean q_err " << s.mean_q_err << ", mean |p_err| " << s.mean_abs_p_err
            << ", mean q1-q2 " << s.mean_q_diff << "\n";
  if (s.sync) std::cout << "  mean S'_g " << s.sync->mean << "\n";
  if (s.cycle1) std::cout << "  limit cycle r " << s.cycle1->r << "\n";
  return 0;
}

int cmd_sweep(const GlobalOptions& g, const std::string& file) {
  qsync::SweepSpec spec = qsync::load_sweep(file);
  if (g.seed) spec.base.seed = *g.seed;

  const auto rows = qsync::run_sweep(spec, g.jobs);
  auto out = open_output(g, spec.name + "_sweep.csv");
  qsync::write_sweep_csv(out, rows, spec.replicas);

  std::size_t failed = 0;
  for (const auto& row : rows) failed += row.status == "ok" ? 0 : 1;
  std::cout << spec.name << ": " << rows.size() << " points over "
            << qsync::to_string(spec.axis) << ", " << failed << " failed\n";
  return 0;
}

int cmd_robustness(const GlobalOptions& g, const std::string& file,
                   const std::vector<double>& sigmas, int replicas) {
  qsync::Scenario sc = qsync::load_scenario(file);
  if (g.seed) sc.seed = *g.seed;

  const auto rows = qsync::robustness_study(sc, sigmas, replicas, g.jobs);
  auto out = open_output(g, sc.name + "_robustness.csv");
  qsync::write_robustness_csv(out, rows);
  for (const auto& row : rows) {
    std::cout << "sigma " << row.sigma << ": R = " << row.r.mean << " +- " << row.r.stddev
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov-controlled synchronization of two optomechanical oscillators"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::uint64_t seed = 0;
  app.add_option("--out-dir", g.out_dir, "Directory for output files")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Maximum concurrent simulations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Override the scenario seed");

  std::string file;
  auto* run = app.add_subcommand("run", "Simulate one scenario");
  run->add_option("file", file, "Scenario file")->required();

  auto* sweep = app.add_subcommand("sweep", "Sweep one parameter");
  sweep->add_option("file", file, "Sweep file")->required();

  std::vector<double> sigmas{0.02};
  int replicas = 20;
  auto* robust = app.add_subcommand("robustness", "Robustness against control noise");
  robust->add_option("file", file, "Scenario file")->required();
  robust->add_option("--sigmas", sigmas, "Noise levels")->delimiter(',')->capture_default_str();
  robust->add_option("--replicas", replicas, "Seeded replicas per noise level")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*run) return cmd_run(g, file);
    if (*sweep) return cmd_sweep(g, file);
    if (*robust) return cmd_robustness(g, file, sigmas, replicas);
  } catch (const qsync::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qsync::NonFiniteError& e) {
    std::cerr << "numerical failure at t=" << e.time() << ": " << e.what() << "\n";
    return kExitNumerical;
  } catch (const qsync::Error& e) {
    std::cerr << qsync::to_string(e.kind()) << ": " << e.what() << "\n";
    return e.kind() == qsync::ErrorKind::InvalidArgument ? kExitConfig : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
