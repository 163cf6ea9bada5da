#include "vibrow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "vibrow/errors.hpp"

namespace vibrow {

double beta_from_time(double t, double omega_eff) {
  return 9.0 / (2.0 * std::numbers::pi) * std::abs(omega_eff) * t;
}

double time_from_beta(double beta, double omega_eff) {
  if (omega_eff == 0.0) throw std::invalid_argument("time_from_beta: effective coupling is zero");
  return beta * 2.0 * std::numbers::pi / (9.0 * std::abs(omega_eff));
}

TimeGrid TimeGrid::from_times(std::vector<double> times, double omega_eff) {
  TimeGrid g;
  g.beta.reserve(times.size());
  for (double t : times) g.beta.push_back(beta_from_time(t, omega_eff));
  g.times = std::move(times);
  g.validate();
  return g;
}

TimeGrid TimeGrid::from_beta(std::vector<double> beta, double omega_eff) {
  TimeGrid g;
  g.times.reserve(beta.size());
  for (double b : beta) g.times.push_back(time_from_beta(b, omega_eff));
  g.beta = std::move(beta);
  g.validate();
  return g;
}

TimeGrid TimeGrid::uniform_beta(double beta_min, double beta_max, std::size_t samples, double omega_eff) {
  if (samples < 2) throw std::invalid_argument("TimeGrid::uniform_beta: need at least 2 samples");
  if (!(beta_max > beta_min)) throw std::invalid_argument("TimeGrid::uniform_beta: empty beta range");
  std::vector<double> b(samples);
  for (std::size_t k = 0; k < samples; ++k)
    b[k] = beta_min + (beta_max - beta_min) * static_cast<double>(k) / static_cast<double>(samples - 1);
  return from_beta(std::move(b), omega_eff);
}

void TimeGrid::validate() const {
  if (times.size() != beta.size()) throw std::invalid_argument("TimeGrid: times and beta differ in length");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k]) || times[k] < 0.0)
      throw std::invalid_argument("TimeGrid: times must be finite and non-negative");
    if (k > 0 && !(times[k] > times[k - 1]))
      throw std::invalid_argument("TimeGrid: times must be strictly increasing");
  }
}

void PulseSchedule::validate() const {
  for (const auto& s : segments) {
    if (!(s.rate >= 0.0)) throw std::invalid_argument("PulseSchedule: rates must be >= 0");
    if (!(s.stop > s.start) || s.start < 0.0)
      throw std::invalid_argument("PulseSchedule: segments need 0 <= start < stop");
  }
  for (std::size_t i = 0; i < segments.size(); ++i)
    for (std::size_t j = i + 1; j < segments.size(); ++j) {
      const auto& a = segments[i];
      const auto& b = segments[j];
      if (a.channel == b.channel && a.start < b.stop && b.start < a.stop) {
        std::ostringstream os;
        os << "PulseSchedule: overlapping segments on channel " << a.channel;
        throw std::invalid_argument(os.str());
      }
    }
}

double PulseSchedule::rate(int channel, double t) const {
  for (const auto& s : segments)
    if (s.channel == channel && t >= s.start && t < s.stop) return s.rate;
  return 0.0;
}

std::vector<double> PulseSchedule::breakpoints() const {
  std::vector<double> b;
  for (const auto& s : segments) {
    b.push_back(s.start);
    b.push_back(s.stop);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

DensityMatrix StateSeries::density(std::size_t k) const {
  if (is_pure()) return DensityMatrix::from_pure(pure.at(k));
  return mixed.at(k);
}

StateSeries evolve_pure(const EigenSystem& es, const PureState& psi0, const TimeGrid& grid) {
  psi0.validate();
  grid.validate();
  if (es.vectors.rows() != psi0.amp.size())
    throw std::invalid_argument("evolve_pure: state does not match Hamiltonian dimension");
  StateSeries out;
  out.grid = grid;
  out.pure.reserve(grid.size());
  const Vector c0 = es.vectors.adjoint() * psi0.amp;
  for (double t : grid.times) {
    const Vector phases = (Complex(0, -1) * t * es.values.cast<Complex>()).array().exp().matrix();
    Vector psi = es.vectors * phases.cwiseProduct(c0);
    const double n = psi.norm();
    if (std::abs(n - 1.0) > 1e-10) {
      std::ostringstream os;
      os << "evolve_pure: norm drifted to " << n << " at t = " << t;
      throw NumericalError(os.str());
    }
    out.pure.emplace_back(psi0.layout, std::move(psi));
  }
  return out;
}

StateSeries evolve_pure(const Operator& h, const PureState& psi0, const TimeGrid& grid) {
  if (!(h.layout == psi0.layout)) throw std::invalid_argument("evolve_pure: layout mismatch");
  return evolve_pure(hermitian_eig(h), psi0, grid);
}

std::array<Complex, 3> analytic_w_dynamics(double alpha) {
  const double c = std::cos(alpha), s = std::sin(alpha);
  const Complex a0(c, s / 3.0);
  const Complex a12(0.0, -2.0 * s / 3.0);
  return {a0, a12, a12};
}

WTimes w_times(int count) {
  if (count < 1) throw std::invalid_argument("w_times: count must be >= 1");
  WTimes w;
  for (int b = 1; static_cast<int>(w.beta_w.size()) < count; ++b)
    if (b % 3 != 0) w.beta_w.push_back(b);
  for (int n = 0; n < count; ++n) w.beta_bc.push_back(1.5 + 3.0 * n);
  return w;
}

std::vector<Operator> dephasing_collapse_ops(const ModelParams& p) {
  p.validate();
  if (p.gamma_dephase == 0.0) return {};
  const auto nb = static_cast<std::size_t>(p.n_max + 1);
  const Operator id2 = ops::identity(2);
  const Operator iv = ops::identity(nb);
  return {std::sqrt(p.gamma_dephase) * kron({ops::sigma_z(), id2, id2, iv, iv})};
}

Matrix lindblad_rhs(const Operator& h, const std::vector<Operator>& ls, const DensityMatrix& rho) {
  if (!(h.layout == rho.layout)) throw std::invalid_argument("lindblad_rhs: H and rho layouts differ");
  const Complex mi(0, -1);
  Matrix d = mi * (h.m * rho.m - rho.m * h.m);
  for (const auto& l : ls) {
    if (!(l.layout == rho.layout)) throw std::invalid_argument("lindblad_rhs: collapse operator layout differs");
    const Matrix ldl = l.m.adjoint() * l.m;
    d += l.m * rho.m * l.m.adjoint() - 0.5 * (ldl * rho.m + rho.m * ldl);
  }
  return d;
}

LindbladMethod parse_lindblad_method(const std::string& name) {
  if (name == "fixed_rk4") return LindbladMethod::fixed_rk4;
  if (name == "split_spectral") return LindbladMethod::split_spectral;
  throw ConfigError("unknown integrator '" + name + "' (expected fixed_rk4 or split_spectral)");
}

const char* lindblad_method_name(LindbladMethod m) {
  return m == LindbladMethod::fixed_rk4 ? "fixed_rk4" : "split_spectral";
}

}  // namespace vibrow
