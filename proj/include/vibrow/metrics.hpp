#pragma once

#include <string>
#include <vector>

#include "vibrow/dynamics.hpp"
#include "vibrow/linops.hpp"

namespace vibrow {

// Wootters concurrence of a two-qubit state. Eigenvalues of rho down to -1e-6
// are treated as zero, below that the state is rejected.
double concurrence(const DensityMatrix& rho_pair);

struct EntanglementMetrics {
  double e_tau = 0.0;  // C_AB^2 + C_AC^2 + C_BC^2
  double c_min_sq = 0.0;
  double c_ab = 0.0;
  double c_ac = 0.0;
  double c_bc = 0.0;
};

// Accepts the full model layout (bosons traced out first) or a bare
// three-qubit state.
EntanglementMetrics entanglement_metrics(const DensityMatrix& rho);
EntanglementMetrics entanglement_metrics(const PureState& psi);

// (|100> + e^{-i sign 2pi/3} (|010> + |001>)) / sqrt 3 (x) |00>
PureState target_w_state(int sign, int n_max);
DensityMatrix target_w(int sign, int n_max);

// Tr(sigma rho)
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
double fidelity(const PureState& psi, const PureState& target);

// Sum of Lorentzians 2 eta / ((e - e_n)^2 + eta^2).
std::vector<double> spectral_function(const std::vector<double>& energies, const std::vector<double>& eps_grid,
                                      double eta);

struct MetricSeries {
  std::vector<double> beta;
  std::vector<double> e_tau;
  std::vector<double> c_min_sq;
  std::vector<double> c_ab;
  std::vector<double> c_ac;
  std::vector<double> c_bc;
  std::vector<double> fidelity_plus;
  std::vector<double> fidelity_minus;

  static const std::vector<std::string>& columns();
  const std::vector<double>& column(const std::string& name) const;
  std::size_t size() const { return beta.size(); }
  void push(double b, const EntanglementMetrics& m, double f_plus, double f_minus);
  // Largest absolute difference over all columns; sizes must match.
  double max_deviation(const MetricSeries& other) const;
};

// fidelity_plus / fidelity_minus use target_w(+1) / target_w(-1).
MetricSeries compute_metrics(const StateSeries& states);
// Requires reduced states on the three qubits and the two W targets in order.
MetricSeries compute_metrics(const TrajectoryAverage& avg);

// Three-qubit reduction of a full-layout state.
DensityMatrix qubit_state(const DensityMatrix& rho);
DensityMatrix qubit_state(const PureState& psi);

}  // namespace vibrow
