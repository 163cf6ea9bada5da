#pragma once

#include <array>
#include <string>

#include "vibrow/linops.hpp"

namespace vibrow {

// Physical parameters in units of the vibrational energy (omega = 1).
struct ModelParams {
  std::array<double, 3> delta{0.1, 0.1, 0.1};
  std::array<double, 3> t_hop{0.005, 0.005, 0.005};
  std::array<double, 3> g{0.1, 0.1, 0.1};
  std::array<double, 2> omega{1.0, 1.0};
  int n_max = 4;
  double gamma_dephase = 0.0;

  static ModelParams canonical() { return {}; }
  static ModelParams symmetric(double delta, double t, double g, double omega = 1.0, int n_max = 4);

  void validate() const;
  bool equal_frequencies() const { return omega[0] == omega[1]; }
  bool is_symmetric() const;
  // lambda_n = g_n / omega; requires equal mode frequencies.
  double lambda(std::size_t qubit) const;
  SpaceLayout layout() const { return SpaceLayout::full_model(n_max); }
};

// H_qubits (x) I_v (x) I_v + I_8 (x) H_v + V in the lab frame.
Operator build_full_hamiltonian(const ModelParams& p);

struct PolaronHamiltonian {
  Operator h_bar0;  // transformed qubit part (with polaron shifts) plus vibrations
  Operator v_bar;   // dressed tunneling
  Operator s;       // anti-Hermitian generator: H_bar = e^S H e^-S

  Operator h_bar() const { return h_bar0 + v_bar; }
};

// Analytic Lang-Firsov frame. Rejects omega_1 != omega_2.
PolaronHamiltonian build_polaron_hamiltonian(const ModelParams& p);

// Generator S alone.
Operator lang_firsov_generator(const ModelParams& p);

// Label bits (i,j,k) of qubits A,B,C map to index 4i + 2j + k.
constexpr std::size_t branch_index(int i, int j, int k) {
  return static_cast<std::size_t>(4 * i + 2 * j + k);
}

enum class EnergyReference {
  shift_omitted,  // the convention of the tabulated branch energies
  absolute,       // eigenvalues of H_bar0 itself
};

struct BranchEnergies {
  int m = 0;
  int l = 0;
  std::array<double, 8> energy{};
  double omitted_shift = 0.0;  // -(sum g^2 + sum_{n<m} g_n g_m) / omega

  double at(int i, int j, int k) const { return energy[branch_index(i, j, k)]; }
};

BranchEnergies unperturbed_energies(const ModelParams& p, int m, int l,
                                    EnergyReference ref = EnergyReference::shift_omitted);

enum class PerturbationSum {
  ground_replica,  // intermediate states with (m,l) = (0,0) only
  with_replicas,   // additionally includes the m + l = 1 vibrational replicas
};

// Second-order coupling between W-manifold states. The ground_replica mode is
// the closed form -4 g^2 t^2 e^{-2 lambda^2} / (omega delta (delta - 4 g^2 / omega))
// and needs symmetric parameters; with_replicas evaluates the perturbative sum
// from the dressed tunneling matrix elements. Throws ResonanceError at
// delta = 0 or delta = 4 g^2 / omega.
double effective_coupling(const ModelParams& p, PerturbationSum mode = PerturbationSum::ground_replica);

struct EffectiveModel {
  Operator h;                  // basis (|100>, |010>, |001>)
  std::array<double, 3> eigvals;  // (2, -1, -1)
  Matrix eigvecs;              // columns |0'>, |1'>, |2'>
};

EffectiveModel build_effective_h();

enum class Frame {
  lab,      // build_full_hamiltonian
  polaron,  // build_polaron_hamiltonian(...).h_bar(), unitarily equivalent
};

Frame parse_frame(const std::string& name);
const char* frame_name(Frame f);

// Full (non-perturbative) Hamiltonian expressed in the requested frame.
Operator hamiltonian_in_frame(const ModelParams& p, Frame frame);

// Flat index of the qubit configuration |abc> (x) |m l> in the full layout.
std::size_t full_index(int a, int b, int c, int m, int l, int n_max);

}  // namespace vibrow
