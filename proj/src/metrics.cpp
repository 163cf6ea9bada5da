#include "vibrow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace vibrow {

namespace {

// smallest eigenvalue accepted on input
constexpr double kInputFloor = -1e-6;

const SpaceLayout& qubit_layout() {
  static const SpaceLayout l{2, 2, 2};
  return l;
}

bool is_full_layout(const SpaceLayout& l) {
  return l.factors() == 5 && l.dim(0) == 2 && l.dim(1) == 2 && l.dim(2) == 2 && l.dim(3) == l.dim(4) &&
         l.dim(3) >= 2;
}

EntanglementMetrics from_qubits(const DensityMatrix& rq) {
  EntanglementMetrics m;
  m.c_ab = concurrence(partial_trace(rq, {0, 1}));
  m.c_ac = concurrence(partial_trace(rq, {0, 2}));
  m.c_bc = concurrence(partial_trace(rq, {1, 2}));
  const double ab = m.c_ab * m.c_ab, ac = m.c_ac * m.c_ac, bc = m.c_bc * m.c_bc;
  m.e_tau = ab + ac + bc;
  m.c_min_sq = std::min({ab, ac, bc});
  return m;
}

}  // namespace

double concurrence(const DensityMatrix& rho) {
  if (!(rho.layout == SpaceLayout{2, 2})) throw std::invalid_argument("concurrence: expected a two-qubit state");
  const Matrix herm = 0.5 * (rho.m + rho.m.adjoint());
  if (max_abs_diff(herm, rho.m) > 1e-8) throw std::invalid_argument("concurrence: state is not Hermitian");

  Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
  RealVector ev = es.eigenvalues();
  if (ev.minCoeff() < kInputFloor) {
    std::ostringstream os;
    os << "concurrence: state has eigenvalue " << ev.minCoeff();
    throw std::invalid_argument(os.str());
  }
  // drop the numerically empty part of the support
  const double floor = 1e-14 * std::max(1.0, ev.maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = ev(i) < floor ? 0.0 : std::sqrt(ev(i));
  const Matrix sqrt_rho = es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();

  // lambda_i are the singular values of sqrt(rho) (Y x Y) sqrt(rho)^*
  const Matrix yy = kron({ops::sigma_y(), ops::sigma_y()}).m;
  Eigen::JacobiSVD<Matrix> svd(sqrt_rho * yy * sqrt_rho.conjugate());
  RealVector mu = svd.singularValues();
  std::sort(mu.data(), mu.data() + mu.size(), std::greater<>());
  return std::clamp(mu(0) - mu(1) - mu(2) - mu(3), 0.0, 1.0);
}

DensityMatrix qubit_state(const DensityMatrix& rho) {
  if (rho.layout == qubit_layout()) return rho;
  if (!is_full_layout(rho.layout)) throw std::invalid_argument("entanglement_metrics: expected the full model layout");
  return partial_trace(rho, {0, 1, 2});
}

DensityMatrix qubit_state(const PureState& psi) {
  if (psi.layout == qubit_layout()) return DensityMatrix::from_pure(psi);
  if (!is_full_layout(psi.layout)) throw std::invalid_argument("entanglement_metrics: expected the full model layout");
  return partial_trace(psi, {0, 1, 2});
}

EntanglementMetrics entanglement_metrics(const DensityMatrix& rho) { return from_qubits(qubit_state(rho)); }
EntanglementMetrics entanglement_metrics(const PureState& psi) { return from_qubits(qubit_state(psi)); }

PureState target_w_state(int sign, int n_max) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("target_w: sign must be +1 or -1");
  const SpaceLayout layout = SpaceLayout::full_model(n_max);
  const Complex phase = std::polar(1.0, -sign * 2.0 * std::numbers::pi / 3.0);
  const double s = 1.0 / std::sqrt(3.0);
  Vector amp = Vector::Zero(static_cast<Eigen::Index>(layout.total()));
  amp(static_cast<Eigen::Index>(full_index(1, 0, 0, 0, 0, n_max))) = s;
  amp(static_cast<Eigen::Index>(full_index(0, 1, 0, 0, 0, n_max))) = s * phase;
  amp(static_cast<Eigen::Index>(full_index(0, 0, 1, 0, 0, n_max))) = s * phase;
  return {layout, std::move(amp)};
}

DensityMatrix target_w(int sign, int n_max) { return DensityMatrix::from_pure(target_w_state(sign, n_max)); }

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (!(rho.layout == sigma.layout)) throw std::invalid_argument("fidelity: layouts differ");
  // Tr(sigma rho) without forming the product
  return (sigma.m.transpose().cwiseProduct(rho.m)).sum().real();
}

double fidelity(const PureState& psi, const PureState& target) {
  if (!(psi.layout == target.layout)) throw std::invalid_argument("fidelity: layouts differ");
  return std::norm(target.amp.dot(psi.amp));
}

std::vector<double> spectral_function(const std::vector<double>& energies, const std::vector<double>& eps_grid,
                                      double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("spectral_function: eta must be > 0");
  std::vector<double> a(eps_grid.size(), 0.0);
  for (std::size_t k = 0; k < eps_grid.size(); ++k)
    for (double e : energies) {
      const double d = eps_grid[k] - e;
      a[k] += 2.0 * eta / (d * d + eta * eta);
    }
  return a;
}

const std::vector<std::string>& MetricSeries::columns() {
  static const std::vector<std::string> c{"beta", "e_tau", "c_min_sq", "c_ab", "c_ac", "c_bc", "fidelity_plus",
                                          "fidelity_minus"};
  return c;
}

const std::vector<double>& MetricSeries::column(const std::string& name) const {
  if (name == "beta") return beta;
  if (name == "e_tau") return e_tau;
  if (name == "c_min_sq") return c_min_sq;
  if (name == "c_ab") return c_ab;
  if (name == "c_ac") return c_ac;
  if (name == "c_bc") return c_bc;
  if (name == "fidelity_plus") return fidelity_plus;
  if (name == "fidelity_minus") return fidelity_minus;
  throw std::invalid_argument("unknown column '" + name + "'");
}

void MetricSeries::push(double b, const EntanglementMetrics& m, double f_plus, double f_minus) {
  beta.push_back(b);
  e_tau.push_back(m.e_tau);
  c_min_sq.push_back(m.c_min_sq);
  c_ab.push_back(m.c_ab);
  c_ac.push_back(m.c_ac);
  c_bc.push_back(m.c_bc);
  fidelity_plus.push_back(f_plus);
  fidelity_minus.push_back(f_minus);
}

double MetricSeries::max_deviation(const MetricSeries& other) const {
  if (size() != other.size()) throw std::invalid_argument("MetricSeries::max_deviation: sizes differ");
  double d = 0.0;
  for (const auto& name : columns()) {
    if (name == "beta") continue;
    const auto& a = column(name);
    const auto& b = other.column(name);
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  }
  return d;
}

MetricSeries compute_metrics(const StateSeries& states) {
  MetricSeries out;
  if (states.size() == 0) return out;
  const SpaceLayout& layout = states.is_pure() ? states.pure.front().layout : states.mixed.front().layout;
  if (!is_full_layout(layout)) throw std::invalid_argument("compute_metrics: expected the full model layout");
  const int n_max = static_cast<int>(layout.dim(3)) - 1;
  const PureState tp = target_w_state(+1, n_max);
  const PureState tm = target_w_state(-1, n_max);
  for (std::size_t k = 0; k < states.size(); ++k) {
    const double b = states.grid.beta.at(k);
    if (states.is_pure()) {
      const PureState& psi = states.pure[k];
      out.push(b, entanglement_metrics(psi), fidelity(psi, tp), fidelity(psi, tm));
    } else {
      const DensityMatrix& rho = states.mixed[k];
      const double fp = tp.amp.dot(rho.m * tp.amp).real();
      const double fm = tm.amp.dot(rho.m * tm.amp).real();
      out.push(b, entanglement_metrics(rho), fp, fm);
    }
  }
  return out;
}

MetricSeries compute_metrics(const TrajectoryAverage& avg) {
  if (avg.target_population.size() != 2)
    throw std::invalid_argument("compute_metrics: trajectory average needs the two W targets");
  MetricSeries out;
  for (std::size_t k = 0; k < avg.reduced.size(); ++k) {
    if (!(avg.reduced[k].layout == qubit_layout()))
      throw std::invalid_argument("compute_metrics: trajectory average must keep the three qubits");
    out.push(avg.grid.beta.at(k), from_qubits(avg.reduced[k]), avg.target_population[0].at(k),
             avg.target_population[1].at(k));
  }
  return out;
}

}  // namespace vibrow
