#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qsync/control.hpp"
#include "qsync/dynamics.hpp"
#include "qsync/measures.hpp"
#include "qsync/model.hpp"

namespace qsync {

// One simulation as described by a scenario file. Physical values are in units
// of the detuning. The bath is given either as nbar or as a temperature; in the
// latter case params.nbar holds the converted occupation.
struct Scenario {
  std::string name;
  SystemParams params;
  std::optional<double> temperature_kelvin;
  ControlLaw law;
  IntegratorConfig integrator;
  std::optional<MappingPair> mapping_override;
  std::uint64_t seed = 1;
  double noise_sigma = 0.0;
  std::optional<TimeWindow> window_override;

  // Explicit mapping if given, else the one implied by the control law.
  MappingPair mapping() const;
  // Explicit analysis window if given, else [t_end / 2, t_end].
  TimeWindow window() const;

  bool operator==(const Scenario&) const = default;
};

// Parses and validates a JSON scenario. Throws ConfigError with the dotted key
// path of the first missing, unknown or invalid entry.
Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::filesystem::path& path);

// Canonical JSON text; parse_scenario(scenario_to_json(s)) == s.
std::string scenario_to_json(const Scenario& scenario, int indent = 2);

enum class SweepAxis { CMinus, Tau, CMax, Nbar };

const char* to_string(SweepAxis axis) noexcept;

struct SweepSpec {
  std::string name;
  Scenario base;
  SweepAxis axis = SweepAxis::CMinus;
  std::vector<double> values;
  int replicas = 1;
  double lyapunov_eps = 1e-6;

  // Copy of base with the axis set to `value`; a law-derived mapping follows
  // the new c_minus or tau.
  Scenario at(double value) const;
};

// `base` may be an inline scenario object or a path relative to base_dir.
SweepSpec parse_sweep(std::string_view json_text, const std::filesystem::path& base_dir);
SweepSpec load_sweep(const std::filesystem::path& path);

}  // namespace qsync
