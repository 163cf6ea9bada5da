#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "vibrow/linops.hpp"
#include "vibrow/model.hpp"

namespace vibrow {

// beta = (9 / 2 pi) |Omega| t, i.e. beta = 6 alpha / 2 pi with alpha = (3/2) Omega t.
double beta_from_time(double t, double omega_eff);
double time_from_beta(double beta, double omega_eff);

struct TimeGrid {
  std::vector<double> times;  // units of 1/omega
  std::vector<double> beta;

  static TimeGrid from_times(std::vector<double> times, double omega_eff = 0.0);
  static TimeGrid from_beta(std::vector<double> beta, double omega_eff);
  // `samples` points spanning [beta_min, beta_max] inclusive.
  static TimeGrid uniform_beta(double beta_min, double beta_max, std::size_t samples, double omega_eff);

  std::size_t size() const { return times.size(); }
  void validate() const;  // non-negative, strictly increasing
};

struct PulseSegment {
  int channel = 0;  // 1-based dot index
  double start = 0.0;
  double stop = 0.0;
  double rate = 0.0;
};

struct PulseSchedule {
  std::vector<PulseSegment> segments;

  void validate() const;  // rates >= 0, stop > start, no overlap per channel
  double rate(int channel, double t) const;
  // Sorted segment boundaries.
  std::vector<double> breakpoints() const;
  bool empty() const { return segments.empty(); }
};

struct StateSeries {
  TimeGrid grid;
  std::vector<PureState> pure;
  std::vector<DensityMatrix> mixed;

  bool is_pure() const { return !pure.empty() || mixed.empty(); }
  std::size_t size() const { return is_pure() ? pure.size() : mixed.size(); }
  DensityMatrix density(std::size_t k) const;
};

// psi(t) = V exp(-i Lambda t) V^dag psi0, t measured from 0.
StateSeries evolve_pure(const Operator& h, const PureState& psi0, const TimeGrid& grid);
StateSeries evolve_pure(const EigenSystem& es, const PureState& psi0, const TimeGrid& grid);

// Amplitudes on (|100>, |010>, |001>) of the effective-model trajectory.
std::array<Complex, 3> analytic_w_dynamics(double alpha);
inline double alpha_from_time(double t, double omega_eff) { return 1.5 * omega_eff * t; }

struct WTimes {
  std::vector<int> beta_w;      // 1, 2, 4, 5, 7, 8, ...
  std::vector<double> beta_bc;  // 1.5, 4.5, 7.5, ...
};

WTimes w_times(int count);

// sqrt(Gamma) sigma_z on qubit A; empty when Gamma = 0.
std::vector<Operator> dephasing_collapse_ops(const ModelParams& p);

Matrix lindblad_rhs(const Operator& h, const std::vector<Operator>& ls, const DensityMatrix& rho);

enum class LindbladMethod { fixed_rk4, split_spectral };

LindbladMethod parse_lindblad_method(const std::string& name);
const char* lindblad_method_name(LindbladMethod m);

struct LindbladOptions {
  LindbladMethod method = LindbladMethod::fixed_rk4;
  double max_step = 0.05;     // RK4 step bound, 1/omega
  double split_step = 2.0;    // Strang step for split_spectral
  double trace_tol = 1e-6;
  double positivity_floor = -1e-6;
  double hermiticity_tol = 1e-8;
};

using DensityObserver = std::function<void(std::size_t sample, const DensityMatrix& rho)>;

// Streams the state at each grid time to `observer`; throws NumericalError
// when trace, Hermiticity or positivity leave tolerance. Returns rho at the
// last grid time.
DensityMatrix evolve_lindblad(const Operator& h, const std::vector<Operator>& ls, const DensityMatrix& rho0,
                              const TimeGrid& grid, const LindbladOptions& opts, const DensityObserver& observer);

StateSeries evolve_lindblad(const Operator& h, const std::vector<Operator>& ls, const DensityMatrix& rho0,
                            const TimeGrid& grid, const LindbladOptions& opts = {});

struct McwfOptions {
  int n_traj = 500;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: hardware concurrency
};

// What each trajectory contributes at every sample: the reduced state on
// `keep` (all factors when empty) and |<target|psi>|^2 for each target.
struct McwfObservables {
  std::set<std::size_t> keep;
  std::vector<PureState> targets;
};

struct TrajectoryAverage {
  TimeGrid grid;
  std::vector<DensityMatrix> reduced;
  std::vector<std::vector<double>> target_population;  // [target][sample]
  int n_traj = 0;
  std::uint64_t jumps = 0;
};

// Waiting-time quantum-trajectory unraveling with an exact non-Hermitian
// propagator. Output is independent of the thread count for a fixed seed.
TrajectoryAverage mcwf_evolve(const Operator& h, const std::vector<Operator>& ls, const PureState& psi0,
                              const TimeGrid& grid, const McwfOptions& opts, const McwfObservables& obs = {});

// Per-trajectory RNG seed derived from the run seed.
std::uint64_t trajectory_seed(std::uint64_t seed, std::uint64_t trajectory);

}  // namespace vibrow
