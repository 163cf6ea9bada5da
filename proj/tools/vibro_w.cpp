#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "vibrow/errors.hpp"
#include "vibrow/experiments.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3 };

int cmd_run(const std::string& path, const std::string& out, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw vibrow::ConfigError("cannot open config file '" + path + "'");
  vibrow::Json doc;
  try {
    doc = vibrow::Json::parse(in);
  } catch (const vibrow::Json::parse_error& e) {
    throw vibrow::ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  for (const auto& o : overrides) vibrow::apply_override(doc, o);
  if (!out.empty()) doc["out"] = out;
  const vibrow::RunConfig cfg = vibrow::parse_config(doc);
  const auto res = vibrow::run(cfg);
  for (const auto& f : res.files) std::cout << f.string() << '\n';
  return kOk;
}

int cmd_peaks(const std::string& path, const std::string& column, double prominence) {
  const vibrow::Table t = vibrow::read_csv(path);
  std::cout << vibrow::peak_report(t, {column}, prominence).dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"W-state formation in three charge qubits coupled to two vibrational modes"};
  app.set_version_flag("--version", std::string(vibrow::kCodeVersion));
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  std::optional<long long> seed, n_max, n_traj;
  run->add_option("config", config_path, "Config JSON")->required();
  run->add_option("--out", out_dir, "Output directory (overrides 'out')");
  run->add_option("--seed", seed, "RNG seed for trajectory runs");
  run->add_option("--n-max", n_max, "Fock truncation per mode");
  run->add_option("--traj", n_traj, "Number of trajectories");
  run->add_option("--override", overrides, "key=value, repeatable")->take_all();

  auto* peaks = app.add_subcommand("peaks", "Detect peaks of a beta series in a data CSV");
  std::string csv_path, column = "e_tau";
  double prominence = 0.05;
  peaks->add_option("data", csv_path, "CSV with a 'beta' column")->required();
  peaks->add_option("--column", column, "Column to scan");
  peaks->add_option("--prominence", prominence, "Minimum prominence as a fraction of the column range");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (run->parsed()) {
      if (seed) overrides.push_back("seed=" + std::to_string(*seed));
      if (n_max) overrides.push_back("n_max=" + std::to_string(*n_max));
      if (n_traj) overrides.push_back("n_traj=" + std::to_string(*n_traj));
      return cmd_run(config_path, out_dir, overrides);
    }
    return cmd_peaks(csv_path, column, prominence);
  } catch (const vibrow::NumericalError& e) {
    std::cerr << "vibro-w: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const vibrow::ResonanceError& e) {
    std::cerr << "vibro-w: " << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "vibro-w: config error: " << e.what() << '\n';
    return kConfig;
  } catch (const vibrow::Json::exception& e) {
    std::cerr << "vibro-w: config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "vibro-w: numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}
