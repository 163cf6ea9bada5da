#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "helpers.hpp"
#include "vibrow/dynamics.hpp"
#include "vibrow/metrics.hpp"

using namespace vibrow;

namespace {

constexpr double kPi = std::numbers::pi;

DensityMatrix pair(const Vector& a) { return DensityMatrix::from_pure(PureState(SpaceLayout{2, 2}, a)); }

PureState three_qubit(std::initializer_list<std::pair<int, Complex>> amps) {
  Vector v = Vector::Zero(8);
  for (const auto& [i, a] : amps) v(i) = a;
  return {SpaceLayout{2, 2, 2}, v / v.norm()};
}

// |psi> (x) |00> on the full layout
PureState with_vacuum(const PureState& q, int n_max) {
  const auto nb = static_cast<Eigen::Index>((n_max + 1) * (n_max + 1));
  Vector v = Vector::Zero(8 * nb);
  for (Eigen::Index i = 0; i < 8; ++i) v(i * nb) = q.amp(i);
  return {SpaceLayout::full_model(n_max), v};
}

PureState analytic_state(double alpha) {
  const auto a = analytic_w_dynamics(alpha);
  return three_qubit({{4, a[0]}, {2, a[1]}, {1, a[2]}});
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("concurrence of reference states") {
  const double s = 1 / std::sqrt(2.0);
  CHECK(concurrence(pair((Vector(4) << s, 0, 0, s).finished())) == doctest::Approx(1.0).scale(0).epsilon(1e-12));
  CHECK(concurrence(pair((Vector(4) << 0, 1, 0, 0).finished())) == doctest::Approx(0.0));
  const PureState w = three_qubit({{1, 1}, {2, 1}, {4, 1}});
  for (const std::set<std::size_t>& keep : {std::set<std::size_t>{0, 1}, {0, 2}, {1, 2}})
    CHECK(concurrence(partial_trace(w, keep)) == doctest::Approx(2.0 / 3).scale(0).epsilon(1e-12));
  CHECK(concurrence(DensityMatrix(SpaceLayout{2, 2}, Matrix::Identity(4, 4) / 4.0)) == 0.0);
}

TEST_CASE("pure-state oracle C = 2|ad - bc|") {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const PureState psi = testing::random_state(rng, SpaceLayout{2, 2});
    const Vector& v = psi.amp;
    const double want = 2 * std::abs(v(0) * v(3) - v(1) * v(2));
    worst = std::max(worst, std::abs(concurrence(DensityMatrix::from_pure(psi)) - want));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("concurrence is invariant under local unitaries") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix r = testing::random_density(rng, SpaceLayout{2, 2});
    const Matrix u = kron({Operator(SpaceLayout{2}, testing::random_unitary(rng, 2)),
                           Operator(SpaceLayout{2}, testing::random_unitary(rng, 2))}).m;
    const DensityMatrix rot(SpaceLayout{2, 2}, u * r.m * u.adjoint());
    CHECK(std::abs(concurrence(rot) - concurrence(r)) < 1e-9);
    // rank-2 mixtures have non-trivial concurrence
    const PureState a = testing::random_state(rng, SpaceLayout{2, 2});
    const PureState b = testing::random_state(rng, SpaceLayout{2, 2});
    const DensityMatrix mix(SpaceLayout{2, 2}, 0.8 * a.amp * a.amp.adjoint() + 0.2 * b.amp * b.amp.adjoint());
    const DensityMatrix mix_rot(SpaceLayout{2, 2}, u * mix.m * u.adjoint());
    CHECK(std::abs(concurrence(mix_rot) - concurrence(mix)) < 1e-9);
  }
}

TEST_CASE("concurrence rejects invalid states") {
  CHECK_THROWS_AS(concurrence(DensityMatrix(SpaceLayout{2, 2, 2}, Matrix::Identity(8, 8) / 8.0)), std::invalid_argument);
  Matrix bad = Matrix::Identity(4, 4) / 4.0;
  bad(0, 1) = 0.3;
  CHECK_THROWS_AS(concurrence(DensityMatrix(SpaceLayout{2, 2}, bad)), std::invalid_argument);
  Matrix neg = Matrix::Zero(4, 4);
  neg(0, 0) = 1.1;
  neg(1, 1) = -0.1;
  CHECK_THROWS_AS(concurrence(DensityMatrix(SpaceLayout{2, 2}, neg)), std::invalid_argument);
}

TEST_CASE("entanglement metrics of W, GHZ and product states") {
  const PureState w = with_vacuum(three_qubit({{1, 1}, {2, 1}, {4, 1}}), 2);
  const auto mw = entanglement_metrics(w);
  CHECK(mw.e_tau == doctest::Approx(4.0 / 3).scale(0).epsilon(1e-12));
  CHECK(mw.c_min_sq == doctest::Approx(4.0 / 9).scale(0).epsilon(1e-12));
  const auto md = entanglement_metrics(DensityMatrix::from_pure(w));
  CHECK(md.e_tau == doctest::Approx(mw.e_tau).scale(0).epsilon(1e-12));

  const auto mg = entanglement_metrics(with_vacuum(three_qubit({{0, 1}, {7, 1}}), 2));
  CHECK(mg.e_tau < 1e-12);
  CHECK(mg.c_ab < 1e-12);
  CHECK(mg.c_ac < 1e-12);
  CHECK(mg.c_bc < 1e-12);
  const auto mp = entanglement_metrics(with_vacuum(three_qubit({{0, 1}}), 1));
  CHECK(mp.e_tau == 0.0);
  CHECK(mp.c_min_sq == 0.0);

  CHECK_THROWS_AS(entanglement_metrics(PureState::basis(SpaceLayout{2, 2}, {0, 0})), std::invalid_argument);
}

TEST_CASE("metrics are invariant under qubit relabelling of symmetric states") {
  // a symmetric mixture of the W state with |000>
  const PureState w = three_qubit({{1, 1}, {2, 1}, {4, 1}});
  Matrix r = 0.7 * w.amp * w.amp.adjoint();
  r(0, 0) += 0.3;
  const DensityMatrix rho(SpaceLayout{2, 2, 2}, r);
  const auto base = entanglement_metrics(rho);
  // permutation (A B C) -> (B C A)
  Matrix perm = Matrix::Zero(8, 8);
  for (int s = 0; s < 8; ++s) {
    const int a = s >> 2, b = (s >> 1) & 1, c = s & 1;
    perm((b << 2) | (c << 1) | a, s) = 1.0;
  }
  const auto rot = entanglement_metrics(DensityMatrix(SpaceLayout{2, 2, 2}, perm * r * perm.adjoint()));
  CHECK(std::abs(rot.e_tau - base.e_tau) < 1e-9);
  CHECK(std::abs(rot.c_min_sq - base.c_min_sq) < 1e-9);

  // a non-symmetric state: pair values permute, the totals do not
  const PureState x = three_qubit({{1, 0.3}, {2, 0.5}, {4, 0.8}, {7, 0.2}});
  const auto mx = entanglement_metrics(x);
  const auto my = entanglement_metrics(PureState(SpaceLayout{2, 2, 2}, perm * x.amp));
  CHECK(std::abs(mx.e_tau - my.e_tau) < 1e-9);
  CHECK(std::abs(mx.c_min_sq - my.c_min_sq) < 1e-9);
}

TEST_CASE("W targets") {
  for (int sign : {1, -1}) {
    const DensityMatrix t = target_w(sign, 2);
    CHECK(std::abs(t.trace() - Complex(1.0)) < 1e-14);
    CHECK(t.purity() == doctest::Approx(1.0).scale(0).epsilon(1e-14));
    const auto m = entanglement_metrics(t);
    CHECK(m.e_tau == doctest::Approx(4.0 / 3).scale(0).epsilon(1e-12));
    CHECK(m.c_min_sq == doctest::Approx(4.0 / 9).scale(0).epsilon(1e-12));
    const auto i0 = static_cast<Eigen::Index>(full_index(1, 0, 0, 0, 0, 2));
    const auto i1 = static_cast<Eigen::Index>(full_index(0, 1, 0, 0, 0, 2));
    const Complex want = std::polar(1.0 / 3, sign * 2 * kPi / 3);
    CHECK(std::abs(t.m(i0, i1) - want) < 1e-14);
  }
  CHECK_THROWS_AS(target_w(0, 2), std::invalid_argument);
}

TEST_CASE("fidelity") {
  const DensityMatrix tp = target_w(1, 1), tm = target_w(-1, 1);
  CHECK(fidelity(tp, tp) == doctest::Approx(1.0).scale(0).epsilon(1e-14));
  CHECK(fidelity(tp, tm) == doctest::Approx(fidelity(tm, tp)).scale(0).epsilon(1e-14));
  // |<phi+|phi->|^2 = |1 + 2 e^{i 4 pi / 3}|^2 / 9 = 1/3
  CHECK(fidelity(tp, tm) == doctest::Approx(1.0 / 3).scale(0).epsilon(1e-12));
  const DensityMatrix a = DensityMatrix::from_pure(PureState::basis(SpaceLayout::full_model(1), {0, 0, 0, 0, 0}));
  CHECK(fidelity(a, tp) == 0.0);

  // linearity in rho
  std::mt19937_64 rng(4);
  const DensityMatrix r1 = testing::random_density(rng, SpaceLayout::full_model(1));
  const DensityMatrix r2 = testing::random_density(rng, SpaceLayout::full_model(1));
  const DensityMatrix mix(r1.layout, 0.25 * r1.m + 0.75 * r2.m);
  CHECK(std::abs(fidelity(mix, tp) - 0.25 * fidelity(r1, tp) - 0.75 * fidelity(r2, tp)) < 1e-14);

  // the evolved effective-model state at |alpha| = pi/3 is a W target
  CHECK(std::abs(fidelity(with_vacuum(analytic_state(kPi / 3), 1), target_w_state(1, 1)) - 1.0) < 1e-10);
  CHECK(std::abs(fidelity(with_vacuum(analytic_state(-kPi / 3), 1), target_w_state(-1, 1)) - 1.0) < 1e-10);
  CHECK(std::abs(fidelity(with_vacuum(analytic_state(2 * kPi / 3), 1), target_w_state(-1, 1)) - 1.0) < 1e-10);
  CHECK_THROWS_AS(fidelity(tp, target_w(1, 2)), std::invalid_argument);
}

TEST_CASE("E_tau of the analytic trajectory") {
  for (double al = 0.0; al < kPi; al += 0.173) {
    const double e = entanglement_metrics(analytic_state(al)).e_tau;
    CHECK(std::abs(entanglement_metrics(analytic_state(al + kPi)).e_tau - e) < 1e-10);
    CHECK(e <= 4.0 / 3 + 1e-9);
  }
  const double a_max = std::asin(std::sqrt(0.75));
  CHECK(entanglement_metrics(analytic_state(a_max)).e_tau == doctest::Approx(4.0 / 3).scale(0).epsilon(1e-12));
  CHECK(entanglement_metrics(analytic_state(kPi - a_max)).e_tau == doctest::Approx(4.0 / 3).scale(0).epsilon(1e-12));
}

TEST_CASE("spectral function") {
  const double eta = 0.01;
  CHECK(spectral_function({0.3}, {0.3}, eta)[0] == doctest::Approx(2 / eta).scale(0).epsilon(1e-14));

  auto integral = [&](double half_width_in_eta, int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    const double h = 2 * half_width_in_eta * eta / (n - 1);
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = -half_width_in_eta * eta + i * h;
    const auto a = spectral_function({0.0}, x, eta);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += (i == 0 || i == n - 1 ? 0.5 : 1.0) * a[static_cast<std::size_t>(i)];
    return s * h;
  };
  // the exact integral over [-L, L] is 4 atan(L / eta)
  CHECK(std::abs(integral(50, 20001) - 4 * std::atan(50.0)) < 1e-4);
  CHECK(std::abs(integral(100, 40001) - 2 * kPi) < 0.01 * 2 * kPi);

  const std::vector<double> levels{0.1, 0.25, 0.26, 0.9};
  std::vector<double> grid(20001);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = -4.0 + 10.0 * static_cast<double>(i) / (grid.size() - 1);
  const auto a = spectral_function(levels, grid, eta);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    CHECK(a[i] >= 0.0);
    s += 0.5 * (a[i] + a[i + 1]) * (grid[i + 1] - grid[i]);
  }
  CHECK(std::abs(s - 2 * kPi * levels.size()) < 0.02 * 2 * kPi * levels.size());

  CHECK_THROWS_AS(spectral_function({0.0}, {0.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(spectral_function({0.0}, {0.0}, -1.0), std::invalid_argument);
}

TEST_CASE("metric series bookkeeping") {
  MetricSeries s;
  s.push(0.0, {1.0, 0.2, 0.5, 0.6, 0.7}, 0.1, 0.2);
  s.push(0.5, {0.0, 0.0, 0.0, 0.0, 0.0}, 0.0, 0.0);
  CHECK(s.size() == 2);
  CHECK(s.column("c_bc")[0] == 0.7);
  CHECK(MetricSeries::columns().front() == "beta");
  CHECK(MetricSeries::columns().size() == 8);
  CHECK_THROWS_AS(s.column("tangle"), std::invalid_argument);
  MetricSeries t = s;
  t.fidelity_minus[1] = 0.25;
  CHECK(s.max_deviation(t) == doctest::Approx(0.25));
  t.beta.pop_back();
  CHECK_THROWS_AS(s.max_deviation(t), std::invalid_argument);
}

TEST_CASE("series invariants on a closed run") {
  ModelParams p = ModelParams::canonical();
  p.n_max = 2;
  const double om = effective_coupling(p);
  const Operator h = hamiltonian_in_frame(p, Frame::polaron);
  const PureState psi0 = PureState::basis(p.layout(), {1, 0, 0, 0, 0});
  const MetricSeries s = compute_metrics(evolve_pure(h, psi0, TimeGrid::uniform_beta(0, 5, 97, om)));
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double ab = s.c_ab[k] * s.c_ab[k], ac = s.c_ac[k] * s.c_ac[k], bc = s.c_bc[k] * s.c_bc[k];
    CHECK(s.c_min_sq[k] == std::min({ab, ac, bc}));
    CHECK(s.e_tau[k] == doctest::Approx(ab + ac + bc).scale(0).epsilon(1e-14));
    CHECK(s.e_tau[k] >= 0.0);
    CHECK(s.e_tau[k] <= 4.0 / 3 + 1e-6);
    for (double c : {s.c_ab[k], s.c_ac[k], s.c_bc[k]}) {
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
    }
    CHECK(s.fidelity_plus[k] <= 1 + 1e-9);
    CHECK(s.fidelity_minus[k] >= 0.0);
  }
}

TEST_CASE("trajectory averages need both targets") {
  TrajectoryAverage avg;
  avg.grid = TimeGrid::from_times({0.0});
  avg.reduced = {DensityMatrix(SpaceLayout{2, 2, 2}, Matrix::Identity(8, 8) / 8.0)};
  avg.target_population = {{0.1}};
  CHECK_THROWS_AS(compute_metrics(avg), std::invalid_argument);
  avg.target_population = {{0.1}, {0.2}};
  const MetricSeries s = compute_metrics(avg);
  CHECK(s.fidelity_minus[0] == 0.2);
  CHECK(s.e_tau[0] == 0.0);
}

}  // TEST_SUITE
