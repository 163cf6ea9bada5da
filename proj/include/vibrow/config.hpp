#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vibrow/dynamics.hpp"
#include "vibrow/model.hpp"

namespace vibrow {

using Json = nlohmann::ordered_json;

enum class Experiment { fig2_spectral, fig3_closed, fig4_dephasing, fig5_injection, sweep };

Experiment parse_experiment(const std::string& name);
const char* experiment_name(Experiment e);

// closed runs use exact spectral propagation; dissipative runs pick one of the
// Lindblad integrators or the trajectory unraveling
enum class Integrator { exact, fixed_rk4, split_spectral, mcwf };

Integrator parse_integrator(const std::string& name);
const char* integrator_name(Integrator i);

struct SpectralGrid {
  double eps_min = -0.5;
  double eps_max = 1.5;
  int eps_points = 800;
  double delta_min = 0.0;
  double delta_max = 0.4;
  int delta_points = 400;
  double eta = 0.01;
};

struct RunConfig {
  Experiment experiment = Experiment::fig3_closed;
  ModelParams params;
  Frame frame = Frame::polaron;

  double beta_min = 0.0;
  double beta_max = 10.0;
  int samples = 600;

  Integrator integrator = Integrator::exact;
  double max_step = 0.05;
  double split_step = 2.0;
  int n_traj = 500;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  SpectralGrid spectral;

  double pulse_rate = 0.05;
  double pulse_duration = 200.0;
  bool freeze_during_pulse = false;

  double omega_mev = 20.0;
  bool convergence = true;
  double peak_prominence = 0.05;
  std::string out = "out";

  // sweep only
  Json base;
  std::string sweep_key;
  std::vector<Json> sweep_values;

  void validate() const;
};

// Experiment-specific defaults are applied before the document's fields, so
// {"experiment": "fig4_dephasing"} alone is a complete config. Unknown keys
// and ill-typed values raise ConfigError.
RunConfig parse_config(const Json& doc);
RunConfig load_config(const std::string& path);

// Every field of the config with its effective value.
Json config_to_json(const RunConfig& cfg);

// "key=value"; the value is read as JSON when it parses, otherwise as a string.
void apply_override(Json& doc, const std::string& assignment);

}  // namespace vibrow
