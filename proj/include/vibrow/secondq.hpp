#pragma once

#include <array>
#include <string>
#include <vector>

#include "vibrow/dynamics.hpp"
#include "vibrow/linops.hpp"
#include "vibrow/model.hpp"

namespace vibrow {

// Six spinless dots, qubit n on dots (2n-1, 2n); an electron on the odd dot
// is qubit |0>, on the even dot |1>. Internally bit 1 of a fermionic factor
// means occupied; the printed strings use 1 for an empty dot.
struct SqModelParams {
  std::array<double, 6> eps{0.05, -0.05, 0.05, -0.05, 0.05, -0.05};
  std::array<double, 3> t_hop{0.005, 0.005, 0.005};
  std::array<double, 2> g{0.1, 0.1};  // g1: odd dots to mode 1, g2: even dots to mode 2
  std::array<double, 2> omega{1.0, 1.0};
  int n_max = 2;
  PulseSchedule pulse;
  // Hoppings and couplings off while the pulse runs.
  bool freeze_during_pulse = false;

  // eps_odd = delta_n / 2, eps_even = -delta_n / 2; the first-quantized
  // couplings must be equal on all three qubits.
  static SqModelParams calibrated(const ModelParams& p);
  // Constant rate on dots 2, 3 and 5 over [0, duration].
  static PulseSchedule injection_pulse(double rate = 0.05, double duration = 200.0);

  void validate() const;
  SpaceLayout layout() const;
  double pulse_end() const;
};

// Jordan-Wigner annihilators d_j = (prod_{k<j} Z_k) sigma_j on n_modes two-level factors.
std::vector<Operator> jw_operators(int n_modes = 6);
// The same operators extended by identities on the two boson modes.
std::vector<Operator> jw_operators_full(int n_max);

// H_0 = sum eps_i n_i + sum_n t_n (d_{2n-1}^dag d_{2n} + h.c.)
//       + g1 sum_odd n_i (b1 + b1^dag) + g2 sum_even n_i (b2 + b2^dag) + omega1 N1 + omega2 N2
Operator build_sq_model(const SqModelParams& p);

// Paper-style occupation string ("100101", 1 = empty dot) plus boson occupations.
PureState sq_basis_state(const std::string& pattern, int m, int l, int n_max);
std::string sq_pattern(std::size_t fermion_index);

// [|100101> + e^{+i sign 2pi/3} (|011001> + |010110>)] (x) |00> / sqrt 3
PureState sq_target_state(int sign, int n_max);
DensityMatrix sq_target(int sign, int n_max);

// Indices of the one-electron-per-qubit sector in the full sq layout, ordered
// like the first-quantized basis |abc> (x) |m l>.
std::vector<Eigen::Index> sq_qubit_sector(int n_max);

struct InjectionOptions {
  LindbladOptions lindblad;
};

// rho(t) for t measured from the pulse start; the pulse is integrated with
// evolve_lindblad and the remainder propagated exactly in the H_0 eigenbasis.
StateSeries injection_evolve(const SqModelParams& p, const TimeGrid& grid, const InjectionOptions& opts = {});

struct InjectionRun {
  TimeGrid grid;
  std::vector<double> fidelity_plus;   // against sq_target(+1)
  std::vector<double> fidelity_minus;  // against sq_target(-1)
  std::vector<double> particles;       // <N>
  DensityMatrix pulse_end_state;
};

// Same dynamics, reporting only the observables on the grid.
InjectionRun injection_fidelity(const SqModelParams& p, const TimeGrid& grid, const InjectionOptions& opts = {});

}  // namespace vibrow
