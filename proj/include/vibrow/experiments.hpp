#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vibrow/config.hpp"
#include "vibrow/dynamics.hpp"
#include "vibrow/io.hpp"
#include "vibrow/metrics.hpp"
#include "vibrow/peaks.hpp"
#include "vibrow/secondq.hpp"

namespace vibrow {

// |100> (x) |00>
PureState initial_w_state(int n_max);

// Closed evolution from |100>|00> under the full Hamiltonian in `frame`.
MetricSeries closed_series(const ModelParams& p, Frame frame, const TimeGrid& grid);

struct DissipativeOptions {
  Integrator integrator = Integrator::split_spectral;
  LindbladOptions lindblad;
  McwfOptions mcwf;
};

// Dephasing on qubit A from |100>|00>.
MetricSeries dephased_series(const ModelParams& p, Frame frame, const TimeGrid& grid, const DissipativeOptions& opts);

// A(delta, eps) of the lab-frame Hamiltonian, levels reported with the
// -(sum g^2 + sum g_n g_m)/omega shift removed. Row-major over (delta, eps).
struct SpectralMap {
  std::vector<double> delta;
  std::vector<double> eps;
  std::vector<double> a;
  std::vector<std::vector<double>> levels;  // in-window levels per delta
};

SpectralMap spectral_map(const ModelParams& p, const SpectralGrid& grid);

SqModelParams injection_params(const RunConfig& cfg, int n_max);

TimeGrid beta_grid(const RunConfig& cfg);

struct ExperimentData {
  Table table;
  std::vector<std::string> peak_columns;  // empty for non-beta data
};

// One computation at the config's n_max (or `n_max_override` when > 0).
ExperimentData compute(const RunConfig& cfg, int n_max_override = 0);

struct RunResult {
  std::vector<std::filesystem::path> files;
  Json manifest;
};

// Writes data.csv, manifest.json and (for beta series) peaks.json into
// cfg.out, or one sub-directory per point for sweeps.
RunResult run(const RunConfig& cfg);

Json peak_report(const Table& t, const std::vector<std::string>& columns, double prominence);

extern const char* const kCodeVersion;

}  // namespace vibrow
