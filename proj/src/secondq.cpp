#include "vibrow/secondq.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "vibrow/errors.hpp"

namespace vibrow {

namespace {

constexpr int kDots = 6;
constexpr std::size_t kFermionDim = 1u << kDots;

bool occupied(std::size_t f, int dot) {  // dot is 0-based
  return (f >> (kDots - 1 - dot)) & 1u;
}

std::size_t flip(std::size_t f, int dot) { return f ^ (std::size_t{1} << (kDots - 1 - dot)); }

SpaceLayout sq_layout(int n_max) {
  const auto nb = static_cast<std::size_t>(n_max + 1);
  return SpaceLayout{2, 2, 2, 2, 2, 2, nb, nb};
}

int parity_between(std::size_t f, int a, int b) {
  int n = 0;
  for (int k = std::min(a, b) + 1; k < std::max(a, b); ++k) n += occupied(f, k);
  return n % 2;
}

// Dense H in the occupation basis; `coupled` false drops hoppings and g.
Matrix assemble(const SqModelParams& p, bool coupled) {
  const auto nb = static_cast<std::size_t>(p.n_max + 1);
  const auto dim = static_cast<Eigen::Index>(kFermionDim * nb * nb);
  Matrix h = Matrix::Zero(dim, dim);
  auto idx = [&](std::size_t f, std::size_t m, std::size_t l) {
    return static_cast<Eigen::Index>((f * nb + m) * nb + l);
  };
  for (std::size_t f = 0; f < kFermionDim; ++f) {
    double e = 0.0;
    int n_odd = 0, n_even = 0;
    for (int d = 0; d < kDots; ++d) {
      if (!occupied(f, d)) continue;
      e += p.eps[d];
      (d % 2 == 0 ? n_odd : n_even) += 1;
    }
    for (std::size_t m = 0; m < nb; ++m)
      for (std::size_t l = 0; l < nb; ++l) {
        const auto i = idx(f, m, l);
        h(i, i) += e + p.omega[0] * static_cast<double>(m) + p.omega[1] * static_cast<double>(l);
        if (!coupled) continue;
        if (m + 1 < nb) {
          const double x = p.g[0] * n_odd * std::sqrt(static_cast<double>(m + 1));
          h(idx(f, m + 1, l), i) += x;
          h(i, idx(f, m + 1, l)) += x;
        }
        if (l + 1 < nb) {
          const double x = p.g[1] * n_even * std::sqrt(static_cast<double>(l + 1));
          h(idx(f, m, l + 1), i) += x;
          h(i, idx(f, m, l + 1)) += x;
        }
      }
    if (!coupled) continue;
    // d_a^dag d_b moves the electron of qubit n from the even dot b to the odd dot a
    for (int q = 0; q < 3; ++q) {
      const int a = 2 * q, b = 2 * q + 1;
      if (!occupied(f, b) || occupied(f, a)) continue;
      const std::size_t f2 = flip(flip(f, b), a);
      const double amp = p.t_hop[q] * (parity_between(f, a, b) ? -1.0 : 1.0);
      for (std::size_t m = 0; m < nb; ++m)
        for (std::size_t l = 0; l < nb; ++l) {
          h(idx(f2, m, l), idx(f, m, l)) += amp;
          h(idx(f, m, l), idx(f2, m, l)) += amp;
        }
    }
  }
  return h;
}

Operator creation_full(int dot, int n_max) {  // dot 1-based
  const auto nb = static_cast<std::size_t>(n_max + 1);
  const SpaceLayout layout = sq_layout(n_max);
  Matrix c = Matrix::Zero(static_cast<Eigen::Index>(layout.total()), static_cast<Eigen::Index>(layout.total()));
  const int d = dot - 1;
  for (std::size_t f = 0; f < kFermionDim; ++f) {
    if (occupied(f, d)) continue;
    const double sign = parity_between(f, -1, d) ? -1.0 : 1.0;
    const std::size_t f2 = flip(f, d);
    for (std::size_t b = 0; b < nb * nb; ++b)
      c(static_cast<Eigen::Index>(f2 * nb * nb + b), static_cast<Eigen::Index>(f * nb * nb + b)) = sign;
  }
  return {layout, std::move(c)};
}

Vector number_diagonal(int n_max) {
  const auto nb = static_cast<std::size_t>(n_max + 1);
  Vector d(static_cast<Eigen::Index>(kFermionDim * nb * nb));
  for (std::size_t f = 0; f < kFermionDim; ++f) {
    int n = 0;
    for (int k = 0; k < kDots; ++k) n += occupied(f, k);
    for (std::size_t b = 0; b < nb * nb; ++b) d(static_cast<Eigen::Index>(f * nb * nb + b)) = n;
  }
  return d;
}

std::size_t pattern_index(const std::string& pattern) {
  if (pattern.size() != static_cast<std::size_t>(kDots))
    throw std::invalid_argument("sq_basis_state: pattern must have six characters");
  std::size_t f = 0;
  for (int d = 0; d < kDots; ++d) {
    const char c = pattern[static_cast<std::size_t>(d)];
    if (c != '0' && c != '1') throw std::invalid_argument("sq_basis_state: pattern must contain only 0 and 1");
    if (c == '0') f = flip(f, d);
  }
  return f;
}

std::vector<Operator> injection_ops(const SqModelParams& p, double t) {
  std::vector<Operator> ls;
  for (int ch : {2, 3, 5}) {
    const double r = p.pulse.rate(ch, t);
    if (r > 0.0) ls.push_back(std::sqrt(r) * creation_full(ch, p.n_max));
  }
  return ls;
}

// Drives rho from t = 0 through the pulse window, calling `sample` at every
// grid time that falls inside it. Returns rho at pulse_end().
template <class Sample>
DensityMatrix run_pulse(const SqModelParams& p, const TimeGrid& grid, const LindbladOptions& opts,
                        Sample&& sample) {
  const SpaceLayout layout = p.layout();
  DensityMatrix rho = DensityMatrix::from_pure(sq_basis_state("111111", 0, 0, p.n_max));
  const double t_end = p.pulse_end();
  std::vector<double> cuts = p.pulse.breakpoints();
  if (cuts.empty() || cuts.front() > 0.0) cuts.insert(cuts.begin(), 0.0);

  std::size_t k = 0;
  while (k < grid.size() && grid.times[k] <= 0.0) sample(k++, rho);
  if (t_end <= 0.0) return rho;

  const Operator h_on = build_sq_model(p);
  const Operator h_pulse = p.freeze_during_pulse ? Operator(layout, assemble(p, false)) : h_on;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double t0 = cuts[c], t1 = cuts[c + 1];
    const auto ls = injection_ops(p, 0.5 * (t0 + t1));
    std::vector<double> local;
    std::vector<std::size_t> which;
    for (; k < grid.size() && grid.times[k] <= t1; ++k) {
      local.push_back(grid.times[k] - t0);
      which.push_back(k);
    }
    const bool end_sampled = !local.empty() && local.back() >= t1 - t0;
    if (!end_sampled) local.push_back(t1 - t0);
    const TimeGrid sub = TimeGrid::from_times(local);
    if (ls.empty()) {
      const EigenSystem es = hermitian_eig(h_pulse);
      double t_prev = 0.0;
      for (std::size_t j = 0; j < sub.size(); ++j) {
        const Matrix u = propagator(es, sub.times[j] - t_prev);
        rho = DensityMatrix(layout, u * rho.m * u.adjoint());
        t_prev = sub.times[j];
        if (j < which.size()) sample(which[j], rho);
      }
    } else {
      rho = evolve_lindblad(h_pulse, ls, rho, sub, opts, [&](std::size_t j, const DensityMatrix& r) {
        if (j < which.size()) sample(which[j], r);
      });
    }
  }
  return rho;
}

}  // namespace

SqModelParams SqModelParams::calibrated(const ModelParams& p) {
  p.validate();
  if (!(p.g[0] == p.g[1] && p.g[1] == p.g[2]))
    throw ConfigError("second-quantized model needs equal couplings g on the three qubits");
  SqModelParams s;
  for (int q = 0; q < 3; ++q) {
    s.eps[2 * q] = 0.5 * p.delta[q];
    s.eps[2 * q + 1] = -0.5 * p.delta[q];
  }
  s.t_hop = p.t_hop;
  s.g = {p.g[0], p.g[0]};
  s.omega = p.omega;
  s.n_max = p.n_max;
  return s;
}

PulseSchedule SqModelParams::injection_pulse(double rate, double duration) {
  PulseSchedule ps;
  for (int ch : {2, 3, 5}) ps.segments.push_back({ch, 0.0, duration, rate});
  ps.validate();
  return ps;
}

void SqModelParams::validate() const {
  if (n_max < 1) throw ConfigError("n_max must be >= 1");
  for (double w : omega)
    if (!(w > 0.0)) throw ConfigError("mode energies must be > 0");
  for (double x : eps)
    if (!std::isfinite(x)) throw ConfigError("dot levels must be finite");
  try {
    pulse.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (const auto& s : pulse.segments)
    if (s.channel != 2 && s.channel != 3 && s.channel != 5) {
      std::ostringstream os;
      os << "pulse channel " << s.channel << " is not an injection dot (expected 2, 3 or 5)";
      throw ConfigError(os.str());
    }
}

SpaceLayout SqModelParams::layout() const { return sq_layout(n_max); }

double SqModelParams::pulse_end() const {
  double t = 0.0;
  for (const auto& s : pulse.segments) t = std::max(t, s.stop);
  return t;
}

std::vector<Operator> jw_operators(int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("jw_operators: need at least one mode");
  std::vector<Operator> out;
  for (int j = 0; j < n_modes; ++j) {
    std::vector<Operator> f;
    for (int k = 0; k < n_modes; ++k) f.push_back(k < j ? ops::sigma_z() : k == j ? ops::sigma_plus() : ops::identity(2));
    out.push_back(kron(std::span<const Operator>(f)));
  }
  return out;
}

std::vector<Operator> jw_operators_full(int n_max) {
  const Operator iv = ops::identity(static_cast<std::size_t>(n_max + 1));
  std::vector<Operator> out;
  for (const auto& d : jw_operators(kDots)) out.push_back(kron({d, iv, iv}));
  return out;
}

Operator build_sq_model(const SqModelParams& p) {
  p.validate();
  return {p.layout(), assemble(p, true)};
}

PureState sq_basis_state(const std::string& pattern, int m, int l, int n_max) {
  if (n_max < 1) throw std::invalid_argument("sq_basis_state: n_max must be >= 1");
  if (m < 0 || l < 0 || m > n_max || l > n_max) throw std::invalid_argument("sq_basis_state: boson level out of range");
  const auto nb = static_cast<std::size_t>(n_max + 1);
  const SpaceLayout layout = sq_layout(n_max);
  Vector amp = Vector::Zero(static_cast<Eigen::Index>(layout.total()));
  amp(static_cast<Eigen::Index>((pattern_index(pattern) * nb + static_cast<std::size_t>(m)) * nb +
                                static_cast<std::size_t>(l))) = 1.0;
  return {layout, std::move(amp)};
}

std::string sq_pattern(std::size_t f) {
  if (f >= kFermionDim) throw std::invalid_argument("sq_pattern: index out of range");
  std::string s(kDots, '1');
  for (int d = 0; d < kDots; ++d)
    if (occupied(f, d)) s[static_cast<std::size_t>(d)] = '0';
  return s;
}

PureState sq_target_state(int sign, int n_max) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("sq_target: sign must be +1 or -1");
  const Complex phase = std::polar(1.0, sign * 2.0 * std::numbers::pi / 3.0);
  PureState s = sq_basis_state("100101", 0, 0, n_max);
  s.amp += phase * (sq_basis_state("011001", 0, 0, n_max).amp + sq_basis_state("010110", 0, 0, n_max).amp);
  s.amp /= std::sqrt(3.0);
  return s;
}

DensityMatrix sq_target(int sign, int n_max) { return DensityMatrix::from_pure(sq_target_state(sign, n_max)); }

std::vector<Eigen::Index> sq_qubit_sector(int n_max) {
  const auto nb = static_cast<std::size_t>(n_max + 1);
  std::vector<Eigen::Index> out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        std::size_t f = 0;
        const int bits[3] = {a, b, c};
        for (int q = 0; q < 3; ++q) f = flip(f, 2 * q + bits[q]);
        for (std::size_t m = 0; m < nb; ++m)
          for (std::size_t l = 0; l < nb; ++l)
            out.push_back(static_cast<Eigen::Index>((f * nb + m) * nb + l));
      }
  return out;
}

StateSeries injection_evolve(const SqModelParams& p, const TimeGrid& grid, const InjectionOptions& opts) {
  p.validate();
  grid.validate();
  StateSeries out;
  out.grid = grid;
  out.mixed.resize(grid.size());
  const DensityMatrix rho_end =
      run_pulse(p, grid, opts.lindblad, [&](std::size_t k, const DensityMatrix& r) { out.mixed[k] = r; });
  const double t_end = p.pulse_end();
  std::size_t k = 0;
  while (k < grid.size() && grid.times[k] <= t_end) ++k;
  if (k < grid.size()) {
    const EigenSystem es = hermitian_eig(build_sq_model(p));
    for (; k < grid.size(); ++k) {
      const Matrix u = propagator(es, grid.times[k] - t_end);
      out.mixed[k] = DensityMatrix(p.layout(), u * rho_end.m * u.adjoint());
    }
  }
  return out;
}

InjectionRun injection_fidelity(const SqModelParams& p, const TimeGrid& grid, const InjectionOptions& opts) {
  p.validate();
  grid.validate();
  InjectionRun run;
  run.grid = grid;
  run.fidelity_plus.resize(grid.size());
  run.fidelity_minus.resize(grid.size());
  run.particles.resize(grid.size());
  const PureState tp = sq_target_state(+1, p.n_max);
  const PureState tm = sq_target_state(-1, p.n_max);
  const Vector n_diag = number_diagonal(p.n_max);

  run.pulse_end_state = run_pulse(p, grid, opts.lindblad, [&](std::size_t k, const DensityMatrix& r) {
    run.fidelity_plus[k] = tp.amp.dot(r.m * tp.amp).real();
    run.fidelity_minus[k] = tm.amp.dot(r.m * tm.amp).real();
    run.particles[k] = r.m.diagonal().dot(n_diag).real();
  });

  const double t_end = p.pulse_end();
  std::size_t k = 0;
  while (k < grid.size() && grid.times[k] <= t_end) ++k;
  if (k == grid.size()) return run;

  const EigenSystem es = hermitian_eig(build_sq_model(p));
  const Matrix rho_t = es.vectors.adjoint() * run.pulse_end_state.m * es.vectors;
  const Vector phi_p = es.vectors.adjoint() * tp.amp;
  const Vector phi_m = es.vectors.adjoint() * tm.amp;
  // H_0 conserves N, so <N> is frozen after the pulse
  const double n_after = run.pulse_end_state.m.diagonal().dot(n_diag).real();
  for (; k < grid.size(); ++k) {
    const double tau = grid.times[k] - t_end;
    const Vector ph = (Complex(0, 1) * tau * es.values.cast<Complex>()).array().exp().matrix();
    const Vector wp = ph.cwiseProduct(phi_p);
    const Vector wm = ph.cwiseProduct(phi_m);
    run.fidelity_plus[k] = wp.dot(rho_t * wp).real();
    run.fidelity_minus[k] = wm.dot(rho_t * wm).real();
    run.particles[k] = n_after;
  }
  return run;
}

}  // namespace vibrow
