#include "qsync/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json_io.hpp"
#include "qsync/errors.hpp"

namespace qsync {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Walks one JSON object, remembering which keys were consumed so that typos
// surface as errors instead of silently falling back to defaults.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_, path_ + " must be an object");
  }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json& at(const std::string& key) {
    if (!node_.contains(key)) {
      throw ConfigError(key_path(key), "missing required key '" + key_path(key) + "'");
    }
    used_.insert(key);
    return node_.at(key);
  }

  double real(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(key_path(key), key_path(key) + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(key_path(key), key_path(key) + " must be finite");
    return x;
  }

  double real_or(const std::string& key, double fallback) {
    return has(key) ? real(key) : fallback;
  }

  std::optional<double> optional_real(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return real(key);
  }

  std::int64_t integer_or(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_integer()) {
      throw ConfigError(key_path(key), key_path(key) + " must be an integer");
    }
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_or(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_unsigned()) {
      throw ConfigError(key_path(key), key_path(key) + " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean_or(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) throw ConfigError(key_path(key), key_path(key) + " must be a boolean");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(key_path(key), key_path(key) + " must be a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!used_.count(key)) {
        throw ConfigError(key_path(key), "unknown key '" + key_path(key) + "'");
      }
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

json parse_text(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", what + " is not valid JSON: " + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Re-throws validation failures of the core types as configuration errors.
template <class F>
void checked(const std::string& key, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.field().empty() ? key : key + "." + e.field(), e.what());
  }
}

GeneralizedMapping read_mapping(ObjectReader& parent, const std::string& key) {
  ObjectReader r(parent.at(key), parent.key_path(key));
  const std::string kind = r.string("kind");
  GeneralizedMapping h;
  if (kind == "identity") {
    h = GeneralizedMapping::identity();
  } else if (kind == "constant_shift") {
    h = GeneralizedMapping::constant_shift(r.real("c"));
  } else if (kind == "time_shift") {
    const double tau = r.real("tau");
    if (tau < 0.0) throw ConfigError(r.key_path("tau"), r.key_path("tau") + " must be >= 0");
    h = GeneralizedMapping::time_shift(tau);
  } else {
    throw ConfigError(r.key_path("kind"), "unknown mapping kind '" + kind + "'");
  }
  r.finish();
  return h;
}

ojson mapping_json(const GeneralizedMapping& h) {
  switch (h.kind) {
    case GeneralizedMapping::Kind::Identity:
      return {{"kind", "identity"}};
    case GeneralizedMapping::Kind::ConstantShift:
      return {{"kind", "constant_shift"}, {"c", h.value}};
    case GeneralizedMapping::Kind::TimeShift:
      return {{"kind", "time_shift"}, {"tau", h.value}};
  }
  return {};
}

Scenario scenario_from_json(const json& root, const std::string& path) {
  ObjectReader top(root, path);
  Scenario sc;
  sc.name = top.string("name");
  if (sc.name.empty()) throw ConfigError(top.key_path("name"), "scenario name must not be empty");

  {
    ObjectReader p(top.at("params"), top.key_path("params"));
    SystemParams& sp = sc.params;
    sp.delta = p.real_or("delta", 1.0);
    sp.omega_m1 = p.real("omega_m1");
    sp.omega_m2 = p.real("omega_m2");
    sp.g1 = p.real("g1");
    sp.g2 = p.real("g2");
    sp.drive = p.real("E");
    sp.kappa = p.real("kappa");
    if (p.has("gamma")) {
      if (p.has("gamma1") || p.has("gamma2")) {
        throw ConfigError(p.key_path("gamma"), "give either gamma or gamma1/gamma2, not both");
      }
      sp.gamma1 = sp.gamma2 = p.real("gamma");
    } else {
      sp.gamma1 = p.real("gamma1");
      sp.gamma2 = p.real("gamma2");
    }

    const bool has_nbar = p.has("nbar");
    const bool has_temp = p.has("temperature_K");
    if (has_nbar == has_temp) {
      throw ConfigError(p.key_path("nbar"),
                        "exactly one of " + p.key_path("nbar") + " and " +
                            p.key_path("temperature_K") + " must be given");
    }
    if (has_nbar) {
      sp.nbar = p.real("nbar");
    } else {
      const double temp = p.real("temperature_K");
      checked(p.key_path("temperature_K"), [&] {
        sp.nbar = mean_phonon_number(temp, kReferencePhononFrequency);
      });
      sc.temperature_kelvin = temp;
    }
    p.finish();
    checked(top.key_path("params"), [&] { sp.validate(); });
  }

  {
    ObjectReader c(top.at("control"), top.key_path("control"));
    const std::string law = c.string("law");
    if (law == "none") {
      sc.law = NoControl{};
    } else if (law == "constant_error") {
      sc.law = ConstantErrorLaw{c.real("k"), c.real("c_minus")};
    } else if (law == "time_delay") {
      sc.law = TimeDelayLaw{c.real("k"), c.real("tau"), c.real("c_max")};
    } else {
      throw ConfigError(c.key_path("law"), "unknown control law '" + law + "'");
    }
    c.finish();
    checked(top.key_path("control"), [&] { validate(sc.law); });
    if (!std::holds_alternative<NoControl>(sc.law) &&
        sc.params.gamma1 != sc.params.gamma2) {
      throw ConfigError(top.key_path("params.gamma2"),
                        "the control laws require gamma1 == gamma2");
    }
  }

  if (top.has("integrator")) {
    ObjectReader i(top.at("integrator"), top.key_path("integrator"));
    IntegratorConfig& cfg = sc.integrator;
    cfg.dt = i.real_or("dt", cfg.dt);
    cfg.t_end = i.real_or("t_end", cfg.t_end);
    cfg.output_stride = i.integer_or("output_stride", cfg.output_stride);
    cfg.record_covariance = i.boolean_or("record_covariance", cfg.record_covariance);
    i.finish();
    checked(top.key_path("integrator"), [&] { cfg.validate(); });
  }

  if (top.has("mapping")) {
    ObjectReader m(top.at("mapping"), top.key_path("mapping"));
    MappingPair pair{read_mapping(m, "h1"), read_mapping(m, "h2")};
    m.finish();
    sc.mapping_override = pair;
  }

  if (top.has("window")) {
    const json& w = top.at("window");
    const std::string key = top.key_path("window");
    if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
      throw ConfigError(key, key + " must be [start, end]");
    }
    TimeWindow win{w[0].get<double>(), w[1].get<double>()};
    if (!(win.start >= 0.0) || !(win.end > win.start) || win.end > sc.integrator.t_end) {
      throw ConfigError(key, key + " must satisfy 0 <= start < end <= t_end");
    }
    sc.window_override = win;
  }

  sc.seed = top.unsigned_or("seed", sc.seed);
  sc.noise_sigma = top.real_or("noise_sigma", 0.0);
  if (sc.noise_sigma < 0.0) {
    throw ConfigError(top.key_path("noise_sigma"), "noise_sigma must be >= 0");
  }
  top.finish();
  return sc;
}

SweepAxis parse_axis(const std::string& s, const std::string& key) {
  if (s == "c_minus") return SweepAxis::CMinus;
  if (s == "tau") return SweepAxis::Tau;
  if (s == "c_max") return SweepAxis::CMax;
  if (s == "nbar") return SweepAxis::Nbar;
  throw ConfigError(key, "unknown sweep axis '" + s + "'");
}

}  // namespace

namespace detail {

ojson scenario_json(const Scenario& sc) {
  ojson params;
  params["delta"] = sc.params.delta;
  params["omega_m1"] = sc.params.omega_m1;
  params["omega_m2"] = sc.params.omega_m2;
  params["g1"] = sc.params.g1;
  params["g2"] = sc.params.g2;
  params["E"] = sc.params.drive;
  params["kappa"] = sc.params.kappa;
  params["gamma1"] = sc.params.gamma1;
  params["gamma2"] = sc.params.gamma2;
  if (sc.temperature_kelvin) {
    params["temperature_K"] = *sc.temperature_kelvin;
  } else {
    params["nbar"] = sc.params.nbar;
  }

  ojson control;
  if (const auto* ce = std::get_if<ConstantErrorLaw>(&sc.law)) {
    control = {{"law", "constant_error"}, {"k", ce->gain}, {"c_minus", ce->c_minus}};
  } else if (const auto* td = std::get_if<TimeDelayLaw>(&sc.law)) {
    control = {{"law", "time_delay"}, {"k", td->gain}, {"tau", td->tau}, {"c_max", td->c_max}};
  } else {
    control = {{"law", "none"}};
  }

  ojson out;
  out["name"] = sc.name;
  out["params"] = params;
  out["control"] = control;
  out["integrator"] = {{"dt", sc.integrator.dt},
                       {"t_end", sc.integrator.t_end},
                       {"output_stride", sc.integrator.output_stride},
                       {"record_covariance", sc.integrator.record_covariance}};
  if (sc.mapping_override) {
    out["mapping"] = {{"h1", mapping_json(sc.mapping_override->h1)},
                      {"h2", mapping_json(sc.mapping_override->h2)}};
  }
  if (sc.window_override) {
    out["window"] = {sc.window_override->start, sc.window_override->end};
  }
  out["seed"] = sc.seed;
  out["noise_sigma"] = sc.noise_sigma;
  return out;
}

}  // namespace detail

MappingPair Scenario::mapping() const {
  return mapping_override ? *mapping_override : default_mapping(law);
}

TimeWindow Scenario::window() const {
  return window_override ? *window_override : tail_window(integrator.t_end);
}

Scenario parse_scenario(std::string_view json_text) {
  return scenario_from_json(parse_text(json_text, "scenario"), "");
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path));
}

std::string scenario_to_json(const Scenario& scenario, int indent) {
  return detail::scenario_json(scenario).dump(indent);
}

const char* to_string(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::CMinus: return "c_minus";
    case SweepAxis::Tau: return "tau";
    case SweepAxis::CMax: return "c_max";
    case SweepAxis::Nbar: return "nbar";
  }
  return "unknown";
}

Scenario SweepSpec::at(double value) const {
  Scenario sc = base;
  sc.name = base.name + "_" + to_string(axis);
  switch (axis) {
    case SweepAxis::CMinus:
      std::get<ConstantErrorLaw>(sc.law).c_minus = value;
      break;
    case SweepAxis::Tau:
      std::get<TimeDelayLaw>(sc.law).tau = value;
      break;
    case SweepAxis::CMax:
      std::get<TimeDelayLaw>(sc.law).c_max = value;
      break;
    case SweepAxis::Nbar:
      sc.params.nbar = value;
      sc.temperature_kelvin.reset();
      break;
  }
  return sc;
}

SweepSpec parse_sweep(std::string_view json_text, const std::filesystem::path& base_dir) {
  const json root = parse_text(json_text, "sweep");
  ObjectReader top(root, "");
  SweepSpec spec;
  spec.name = top.string("name");

  const json& base = top.at("base");
  if (base.is_string()) {
    const auto path = base_dir / base.get<std::string>();
    try {
      spec.base = scenario_from_json(parse_text(read_file(path), path.string()), "");
    } catch (const ConfigError& e) {
      throw ConfigError("base." + e.key(), std::string(e.what()) + " (in " + path.string() + ")");
    }
  } else {
    spec.base = scenario_from_json(base, "base");
  }

  spec.axis = parse_axis(top.string("axis"), "axis");
  const json& values = top.at("values");
  if (!values.is_array() || values.empty()) {
    throw ConfigError("values", "values must be a non-empty array");
  }
  for (const auto& v : values) {
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      throw ConfigError("values", "values must be finite numbers");
    }
    spec.values.push_back(v.get<double>());
  }
  spec.replicas = static_cast<int>(top.integer_or("replicas", 1));
  if (spec.replicas < 1) throw ConfigError("replicas", "replicas must be >= 1");
  spec.lyapunov_eps = top.real_or("lyapunov_eps", spec.lyapunov_eps);
  if (!(spec.lyapunov_eps >= 1e-8 && spec.lyapunov_eps <= 1e-4)) {
    throw ConfigError("lyapunov_eps", "lyapunov_eps must lie in [1e-8, 1e-4]");
  }
  top.finish();

  const bool ce = std::holds_alternative<ConstantErrorLaw>(spec.base.law);
  const bool td = std::holds_alternative<TimeDelayLaw>(spec.base.law);
  if (spec.axis == SweepAxis::CMinus && !ce) {
    throw ConfigError("axis", "axis c_minus needs a constant_error base scenario");
  }
  if ((spec.axis == SweepAxis::Tau || spec.axis == SweepAxis::CMax) && !td) {
    throw ConfigError("axis", "axis tau/c_max needs a time_delay base scenario");
  }
  for (double v : spec.values) {
    checked("values", [&] {
      Scenario sc = spec.at(v);
      validate(sc.law);
      sc.params.validate();
    });
  }
  return spec;
}

SweepSpec load_sweep(const std::filesystem::path& path) {
  return parse_sweep(read_file(path), path.parent_path());
}

}  // namespace qsync
