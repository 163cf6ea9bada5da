#include "vibrow/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "vibrow/errors.hpp"

namespace vibrow {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> k{
      "experiment", "delta",        "t_hop",          "g",          "omega",          "n_max",
      "gamma_dephase", "frame",     "beta_min",       "beta_max",   "samples",        "integrator",
      "max_step",   "split_step",   "n_traj",         "seed",       "threads",        "eps_min",
      "eps_max",    "eps_points",   "delta_min",      "delta_max",  "delta_points",   "eta",
      "pulse_rate", "pulse_duration", "freeze_during_pulse", "omega_mev", "convergence",
      "peak_prominence", "out",     "base",           "sweep_key",  "sweep_values"};
  return k;
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw ConfigError("config field '" + key + "': " + what);
}

double get_number(const Json& v, const std::string& key) {
  if (!v.is_number()) bad(key, "expected a number, got " + v.dump());
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(key, "must be finite");
  return x;
}

long long get_integer(const Json& v, const std::string& key) {
  if (v.is_number_integer() || v.is_number_unsigned()) return v.get<long long>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::floor(x) == x && std::abs(x) < 9.0e15) return static_cast<long long>(x);
  }
  bad(key, "expected an integer, got " + v.dump());
}

bool get_bool(const Json& v, const std::string& key) {
  if (!v.is_boolean()) bad(key, "expected true or false, got " + v.dump());
  return v.get<bool>();
}

std::string get_string(const Json& v, const std::string& key) {
  if (!v.is_string()) bad(key, "expected a string, got " + v.dump());
  return v.get<std::string>();
}

// scalar broadcasts to every component
template <std::size_t N>
std::array<double, N> get_array(const Json& v, const std::string& key) {
  std::array<double, N> out{};
  if (v.is_number()) {
    out.fill(get_number(v, key));
    return out;
  }
  if (!v.is_array() || v.size() != N)
    bad(key, "expected a number or an array of " + std::to_string(N) + " numbers, got " + v.dump());
  for (std::size_t i = 0; i < N; ++i) out[i] = get_number(v[i], key);
  return out;
}

void apply_defaults(RunConfig& c) {
  switch (c.experiment) {
    case Experiment::fig2_spectral:
      c.params.t_hop = {0.0, 0.0, 0.0};
      c.params.n_max = 4;
      c.frame = Frame::lab;
      break;
    case Experiment::fig3_closed:
      c.params.n_max = 4;
      break;
    case Experiment::fig4_dephasing:
      c.params.n_max = 2;
      c.params.gamma_dephase = 1e-4;
      c.integrator = Integrator::split_spectral;
      break;
    case Experiment::fig5_injection:
      c.params.n_max = 2;
      c.integrator = Integrator::fixed_rk4;
      break;
    case Experiment::sweep:
      break;
  }
}

}  // namespace

Experiment parse_experiment(const std::string& name) {
  if (name == "fig2_spectral") return Experiment::fig2_spectral;
  if (name == "fig3_closed") return Experiment::fig3_closed;
  if (name == "fig4_dephasing") return Experiment::fig4_dephasing;
  if (name == "fig5_injection") return Experiment::fig5_injection;
  if (name == "sweep") return Experiment::sweep;
  throw ConfigError("unknown experiment '" + name +
                    "' (expected fig2_spectral, fig3_closed, fig4_dephasing, fig5_injection or sweep)");
}

const char* experiment_name(Experiment e) {
  switch (e) {
    case Experiment::fig2_spectral: return "fig2_spectral";
    case Experiment::fig3_closed: return "fig3_closed";
    case Experiment::fig4_dephasing: return "fig4_dephasing";
    case Experiment::fig5_injection: return "fig5_injection";
    case Experiment::sweep: return "sweep";
  }
  return "?";
}

Integrator parse_integrator(const std::string& name) {
  if (name == "exact") return Integrator::exact;
  if (name == "fixed_rk4") return Integrator::fixed_rk4;
  if (name == "split_spectral") return Integrator::split_spectral;
  if (name == "mcwf") return Integrator::mcwf;
  throw ConfigError("unknown integrator '" + name + "' (expected exact, fixed_rk4, split_spectral or mcwf)");
}

const char* integrator_name(Integrator i) {
  switch (i) {
    case Integrator::exact: return "exact";
    case Integrator::fixed_rk4: return "fixed_rk4";
    case Integrator::split_spectral: return "split_spectral";
    case Integrator::mcwf: return "mcwf";
  }
  return "?";
}

RunConfig parse_config(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : doc.items())
    if (!known_keys().count(key)) throw ConfigError("unknown config field '" + key + "'");
  if (!doc.contains("experiment")) throw ConfigError("config field 'experiment' is required");

  RunConfig c;
  c.experiment = parse_experiment(get_string(doc.at("experiment"), "experiment"));
  apply_defaults(c);

  if (c.experiment == Experiment::sweep) {
    for (const auto& [key, _] : doc.items())
      if (key != "experiment" && key != "base" && key != "sweep_key" && key != "sweep_values" && key != "out")
        throw ConfigError("sweep config: field '" + key + "' belongs inside 'base'");
    if (!doc.contains("base") || !doc.at("base").is_object()) throw ConfigError("sweep config needs an object 'base'");
    if (!doc.contains("sweep_key")) throw ConfigError("sweep config needs 'sweep_key'");
    if (!doc.contains("sweep_values") || !doc.at("sweep_values").is_array() || doc.at("sweep_values").empty())
      throw ConfigError("sweep config needs a non-empty array 'sweep_values'");
    c.base = doc.at("base");
    c.sweep_key = get_string(doc.at("sweep_key"), "sweep_key");
    for (const auto& v : doc.at("sweep_values")) c.sweep_values.push_back(v);
    if (doc.contains("out")) c.out = get_string(doc.at("out"), "out");
    c.validate();
    return c;
  }
  for (const char* key : {"base", "sweep_key", "sweep_values"})
    if (doc.contains(key)) throw ConfigError(std::string("field '") + key + "' is only valid for experiment 'sweep'");

  for (const auto& [key, v] : doc.items()) {
    if (key == "experiment") continue;
    if (key == "delta") c.params.delta = get_array<3>(v, key);
    else if (key == "t_hop") c.params.t_hop = get_array<3>(v, key);
    else if (key == "g") c.params.g = get_array<3>(v, key);
    else if (key == "omega") c.params.omega = get_array<2>(v, key);
    else if (key == "n_max") c.params.n_max = static_cast<int>(get_integer(v, key));
    else if (key == "gamma_dephase") c.params.gamma_dephase = get_number(v, key);
    else if (key == "frame") {
      try {
        c.frame = parse_frame(get_string(v, key));
      } catch (const std::invalid_argument& e) {
        bad(key, e.what());
      }
    } else if (key == "beta_min") c.beta_min = get_number(v, key);
    else if (key == "beta_max") c.beta_max = get_number(v, key);
    else if (key == "samples") c.samples = static_cast<int>(get_integer(v, key));
    else if (key == "integrator") c.integrator = parse_integrator(get_string(v, key));
    else if (key == "max_step") c.max_step = get_number(v, key);
    else if (key == "split_step") c.split_step = get_number(v, key);
    else if (key == "n_traj") c.n_traj = static_cast<int>(get_integer(v, key));
    else if (key == "seed") {
      const long long s = get_integer(v, key);
      if (s < 0) bad(key, "must be >= 0");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "threads") {
      const long long n = get_integer(v, key);
      if (n < 0) bad(key, "must be >= 0");
      c.threads = static_cast<unsigned>(n);
    } else if (key == "eps_min") c.spectral.eps_min = get_number(v, key);
    else if (key == "eps_max") c.spectral.eps_max = get_number(v, key);
    else if (key == "eps_points") c.spectral.eps_points = static_cast<int>(get_integer(v, key));
    else if (key == "delta_min") c.spectral.delta_min = get_number(v, key);
    else if (key == "delta_max") c.spectral.delta_max = get_number(v, key);
    else if (key == "delta_points") c.spectral.delta_points = static_cast<int>(get_integer(v, key));
    else if (key == "eta") c.spectral.eta = get_number(v, key);
    else if (key == "pulse_rate") c.pulse_rate = get_number(v, key);
    else if (key == "pulse_duration") c.pulse_duration = get_number(v, key);
    else if (key == "freeze_during_pulse") c.freeze_during_pulse = get_bool(v, key);
    else if (key == "omega_mev") c.omega_mev = get_number(v, key);
    else if (key == "convergence") c.convergence = get_bool(v, key);
    else if (key == "peak_prominence") c.peak_prominence = get_number(v, key);
    else if (key == "out") c.out = get_string(v, key);
  }
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (out.empty()) throw ConfigError("config field 'out' must not be empty");
  if (experiment == Experiment::sweep) {
    if (!known_keys().count(sweep_key) || sweep_key == "experiment" || sweep_key == "out" || sweep_key == "base" ||
        sweep_key == "sweep_key" || sweep_key == "sweep_values")
      throw ConfigError("sweep_key '" + sweep_key + "' is not a sweepable field");
    if (base.contains("experiment") && base.at("experiment") == "sweep") throw ConfigError("sweeps cannot nest");
    // every point must parse on its own
    for (const auto& v : sweep_values) {
      Json point = base;
      point[sweep_key] = v;
      (void)parse_config(point);
    }
    return;
  }
  try {
    params.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (experiment == Experiment::fig2_spectral) {
    if (!(spectral.eps_max > spectral.eps_min)) throw ConfigError("eps_max must exceed eps_min");
    if (!(spectral.delta_max > spectral.delta_min)) throw ConfigError("delta_max must exceed delta_min");
    if (spectral.eps_points < 2 || spectral.delta_points < 2) throw ConfigError("spectral grid needs >= 2 points per axis");
    if (!(spectral.eta > 0.0)) throw ConfigError("eta must be > 0");
    return;
  }
  if (!(beta_min >= 0.0)) throw ConfigError("beta_min must be >= 0");
  if (!(beta_max > beta_min)) throw ConfigError("beta_max must exceed beta_min");
  if (samples < 3) throw ConfigError("samples must be >= 3");
  if (!(peak_prominence >= 0.0)) throw ConfigError("peak_prominence must be >= 0");
  if (!(omega_mev > 0.0)) throw ConfigError("omega_mev must be > 0");
  if (!(max_step > 0.0) || max_step > 0.05) throw ConfigError("max_step must lie in (0, 0.05]");
  if (!(split_step > 0.0)) throw ConfigError("split_step must be > 0");
  if (n_traj < 1) throw ConfigError("n_traj must be >= 1");

  switch (experiment) {
    case Experiment::fig3_closed:
      if (integrator != Integrator::exact) throw ConfigError("fig3_closed supports only integrator 'exact'");
      if (params.gamma_dephase != 0.0) throw ConfigError("fig3_closed is closed dynamics: gamma_dephase must be 0");
      break;
    case Experiment::fig4_dephasing:
      if (integrator == Integrator::exact)
        throw ConfigError("fig4_dephasing needs integrator fixed_rk4, split_spectral or mcwf");
      break;
    case Experiment::fig5_injection:
      if (integrator != Integrator::fixed_rk4 && integrator != Integrator::split_spectral)
        throw ConfigError("fig5_injection needs integrator fixed_rk4 or split_spectral");
      if (!(pulse_rate >= 0.0)) throw ConfigError("pulse_rate must be >= 0");
      if (!(pulse_duration >= 0.0)) throw ConfigError("pulse_duration must be >= 0");
      if (params.gamma_dephase != 0.0) throw ConfigError("fig5_injection does not model dephasing: gamma_dephase must be 0");
      if (!(params.g[0] == params.g[1] && params.g[1] == params.g[2]))
        throw ConfigError("fig5_injection needs equal couplings g on the three qubits");
      break;
    default:
      break;
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

Json config_to_json(const RunConfig& c) {
  Json j;
  j["experiment"] = experiment_name(c.experiment);
  if (c.experiment == Experiment::sweep) {
    j["base"] = c.base;
    j["sweep_key"] = c.sweep_key;
    j["sweep_values"] = c.sweep_values;
    j["out"] = c.out;
    return j;
  }
  j["delta"] = c.params.delta;
  j["t_hop"] = c.params.t_hop;
  j["g"] = c.params.g;
  j["omega"] = c.params.omega;
  j["n_max"] = c.params.n_max;
  j["gamma_dephase"] = c.params.gamma_dephase;
  j["frame"] = frame_name(c.frame);
  j["beta_min"] = c.beta_min;
  j["beta_max"] = c.beta_max;
  j["samples"] = c.samples;
  j["integrator"] = integrator_name(c.integrator);
  j["max_step"] = c.max_step;
  j["split_step"] = c.split_step;
  j["n_traj"] = c.n_traj;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["eps_min"] = c.spectral.eps_min;
  j["eps_max"] = c.spectral.eps_max;
  j["eps_points"] = c.spectral.eps_points;
  j["delta_min"] = c.spectral.delta_min;
  j["delta_max"] = c.spectral.delta_max;
  j["delta_points"] = c.spectral.delta_points;
  j["eta"] = c.spectral.eta;
  j["pulse_rate"] = c.pulse_rate;
  j["pulse_duration"] = c.pulse_duration;
  j["freeze_during_pulse"] = c.freeze_during_pulse;
  j["omega_mev"] = c.omega_mev;
  j["convergence"] = c.convergence;
  j["peak_prominence"] = c.peak_prominence;
  j["out"] = c.out;
  return j;
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json& target = (doc.value("experiment", "") == "sweep" && key != "out" && key != "sweep_key" &&
                  key != "sweep_values")
                     ? doc["base"]
                     : doc;
  target[key] = value;
}

}  // namespace vibrow
