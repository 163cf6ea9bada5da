#include "vibrow/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vibrow/errors.hpp"

namespace vibrow {

ModelParams ModelParams::symmetric(double delta, double t, double g, double omega, int n_max) {
  ModelParams p;
  p.delta = {delta, delta, delta};
  p.t_hop = {t, t, t};
  p.g = {g, g, g};
  p.omega = {omega, omega};
  p.n_max = n_max;
  return p;
}

void ModelParams::validate() const {
  if (!(omega[0] > 0.0) || !(omega[1] > 0.0))
    throw ConfigError("ModelParams: mode energies omega must be > 0");
  if (n_max < 1) throw ConfigError("ModelParams: n_max must be >= 1");
  if (!(gamma_dephase >= 0.0)) throw ConfigError("ModelParams: gamma_dephase must be >= 0");
}

bool ModelParams::is_symmetric() const {
  return delta[0] == delta[1] && delta[1] == delta[2] && t_hop[0] == t_hop[1] &&
         t_hop[1] == t_hop[2] && g[0] == g[1] && g[1] == g[2] && equal_frequencies();
}

double ModelParams::lambda(std::size_t qubit) const {
  if (!equal_frequencies())
    throw std::invalid_argument("ModelParams::lambda: requires omega_1 == omega_2");
  return g.at(qubit) / omega[0];
}

namespace {

Operator number_op(int n_max) {
  const auto [b, b_dag] = boson_ladder(n_max);
  return b_dag * b;
}

Operator vib_hamiltonian(const ModelParams& p) {
  const Operator n = number_op(p.n_max);
  const Operator id = ops::identity(static_cast<std::size_t>(p.n_max + 1));
  return p.omega[0] * kron({n, id}) + p.omega[1] * kron({id, n});
}

// Site operator acting on one of the three qubits, identity elsewhere.
Operator on_qubit(const Operator& site, std::size_t qubit) {
  const Operator id = ops::identity(2);
  std::array<Operator, 3> f{id, id, id};
  f[qubit] = site;
  return kron(std::span<const Operator>(f));
}

}  // namespace

std::size_t full_index(int a, int b, int c, int m, int l, int n_max) {
  const auto nb = static_cast<std::size_t>(n_max + 1);
  return (branch_index(a, b, c) * nb + static_cast<std::size_t>(m)) * nb + static_cast<std::size_t>(l);
}

Operator build_full_hamiltonian(const ModelParams& p) {
  p.validate();
  const auto nb = static_cast<std::size_t>(p.n_max + 1);
  const Operator iv = ops::identity(nb);
  const Operator i8 = Operator::identity(SpaceLayout{2, 2, 2});
  const auto [b, b_dag] = boson_ladder(p.n_max);
  const Operator x = b + b_dag;

  const Operator h_qubits = kron_sum(ops::sigma_z(), {p.delta[0] / 2, p.delta[1] / 2, p.delta[2] / 2}) +
                            kron_sum(ops::sigma_x(), p.t_hop);
  const Operator coupling = kron({kron_sum(ops::projector(0), p.g), x, iv}) +
                            kron({kron_sum(ops::projector(1), p.g), iv, x});
  return kron({h_qubits, iv, iv}) + kron({i8, vib_hamiltonian(p)}) + coupling;
}

Operator lang_firsov_generator(const ModelParams& p) {
  p.validate();
  if (!p.equal_frequencies())
    throw std::invalid_argument("Lang-Firsov frame requires omega_1 == omega_2");
  const auto nb = static_cast<std::size_t>(p.n_max + 1);
  const Operator iv = ops::identity(nb);
  const auto [b, b_dag] = boson_ladder(p.n_max);
  const Operator a = b_dag - b;
  const std::array<double, 3> lam{p.lambda(0), p.lambda(1), p.lambda(2)};
  return kron({kron_sum(ops::projector(0), lam), a, iv}) + kron({kron_sum(ops::projector(1), lam), iv, a});
}

PolaronHamiltonian build_polaron_hamiltonian(const ModelParams& p) {
  Operator s = lang_firsov_generator(p);
  const double w = p.omega[0];
  const auto nb = static_cast<std::size_t>(p.n_max + 1);
  const Operator iv = ops::identity(nb);
  const Operator i8 = Operator::identity(SpaceLayout{2, 2, 2});
  const Operator sz = ops::sigma_z();

  Operator hq = kron_sum(sz, {p.delta[0] / 2, p.delta[1] / 2, p.delta[2] / 2});
  const double g2 = p.g[0] * p.g[0] + p.g[1] * p.g[1] + p.g[2] * p.g[2];
  hq += (-g2 / w) * i8;
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t m = n + 1; m < 3; ++m)
      hq += (-p.g[n] * p.g[m] / w) * (on_qubit(sz, n) * on_qubit(sz, m) + i8);

  Operator h_bar0 = kron({hq, iv, iv}) + kron({i8, vib_hamiltonian(p)});

  Operator v_bar = Operator::zero(p.layout());
  for (std::size_t n = 0; n < 3; ++n) {
    const double lam = p.lambda(n);
    const Operator hop = kron({on_qubit(ops::sigma_plus(), n), displacement(lam, p.n_max),
                               displacement(-lam, p.n_max)});
    v_bar += p.t_hop[n] * (hop + hop.adjoint());
  }
  return {std::move(h_bar0), std::move(v_bar), std::move(s)};
}

BranchEnergies unperturbed_energies(const ModelParams& p, int m, int l, EnergyReference ref) {
  p.validate();
  if (!p.equal_frequencies())
    throw std::invalid_argument("unperturbed_energies: requires omega_1 == omega_2");
  const double w = p.omega[0];
  BranchEnergies out;
  out.m = m;
  out.l = l;
  double pair_sum = 0.0;
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t k = n + 1; k < 3; ++k) pair_sum += p.g[n] * p.g[k];
  out.omitted_shift = -(p.g[0] * p.g[0] + p.g[1] * p.g[1] + p.g[2] * p.g[2] + pair_sum) / w;

  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        const std::array<double, 3> s{i ? -1.0 : 1.0, j ? -1.0 : 1.0, k ? -1.0 : 1.0};
        double e = 0.5 * (s[0] * p.delta[0] + s[1] * p.delta[1] + s[2] * p.delta[2]);
        for (std::size_t n = 0; n < 3; ++n)
          for (std::size_t q = n + 1; q < 3; ++q) e -= p.g[n] * p.g[q] * s[n] * s[q] / w;
        e += m * p.omega[0] + l * p.omega[1];
        if (ref == EnergyReference::absolute) e += out.omitted_shift;
        out.energy[branch_index(i, j, k)] = e;
      }
  return out;
}

namespace {

void check_resonances(double delta, double g, double w) {
  const double scale = std::max({1e-300, std::abs(delta), 4 * g * g / w});
  if (std::abs(delta) <= 1e-12 * std::max(1.0, scale))
    throw ResonanceError(
        "effective_coupling: delta = 0 makes the |110>-type intermediate levels degenerate with the W manifold");
  const double d2 = delta - 4 * g * g / w;
  if (std::abs(d2) <= 1e-12 * std::max(1.0, scale)) {
    std::ostringstream os;
    os << "effective_coupling: delta = 4 g^2 / omega (= " << 4 * g * g / w
       << ") makes |000> degenerate with the W manifold";
    throw ResonanceError(os.str());
  }
}

// -sum_k <100,00|V|k><k|V|010,00> / (e_k - e_100,00) over intermediate
// states with m + l <= max_replica.
double perturbative_sum(const ModelParams& p, int max_replica) {
  ModelParams q = p;
  q.n_max = std::max(p.n_max, max_replica + 6);
  const PolaronHamiltonian ph = build_polaron_hamiltonian(q);
  const auto src = static_cast<Eigen::Index>(full_index(1, 0, 0, 0, 0, q.n_max));
  const auto dst = static_cast<Eigen::Index>(full_index(0, 1, 0, 0, 0, q.n_max));
  const double e_ref = unperturbed_energies(q, 0, 0).at(1, 0, 0);
  Complex sum = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        if (i + j + k == 1) continue;  // W manifold
        for (int m = 0; m <= max_replica; ++m)
          for (int l = 0; m + l <= max_replica; ++l) {
            const auto mid = static_cast<Eigen::Index>(full_index(i, j, k, m, l, q.n_max));
            const Complex num = ph.v_bar.m(src, mid) * ph.v_bar.m(mid, dst);
            if (std::abs(num) == 0.0) continue;
            const double den = unperturbed_energies(q, m, l).at(i, j, k) - e_ref;
            sum -= num / den;
          }
      }
  return sum.real();
}

}  // namespace

double effective_coupling(const ModelParams& p, PerturbationSum mode) {
  p.validate();
  if (!p.is_symmetric())
    throw std::invalid_argument("effective_coupling: requires symmetric delta, t, g and omega_1 == omega_2");
  const double w = p.omega[0];
  const double d = p.delta[0];
  const double g = p.g[0];
  const double t = p.t_hop[0];
  check_resonances(d, g, w);
  if (mode == PerturbationSum::with_replicas) return perturbative_sum(p, 1);
  const double lam = g / w;
  return -4 * g * g * t * t * std::exp(-2 * lam * lam) / (w * d * (d - 4 * g * g / w));
}

EffectiveModel build_effective_h() {
  Matrix h(3, 3);
  h << 0, 1, 1, 1, 0, 1, 1, 1, 0;
  Matrix v(3, 3);
  const double s3 = 1 / std::sqrt(3.0), s6 = 1 / std::sqrt(6.0), s2 = 1 / std::sqrt(2.0);
  v << s3, s6, s2,
       s3, s6, -s2,
       s3, -2 * s6, 0;
  return {Operator(SpaceLayout({3}), h), {2.0, -1.0, -1.0}, v};
}

Frame parse_frame(const std::string& name) {
  if (name == "lab") return Frame::lab;
  if (name == "polaron") return Frame::polaron;
  throw ConfigError("unknown frame '" + name + "' (expected lab or polaron)");
}

const char* frame_name(Frame f) { return f == Frame::lab ? "lab" : "polaron"; }

Operator hamiltonian_in_frame(const ModelParams& p, Frame frame) {
  if (frame == Frame::lab) return build_full_hamiltonian(p);
  return build_polaron_hamiltonian(p).h_bar();
}

}  // namespace vibrow
