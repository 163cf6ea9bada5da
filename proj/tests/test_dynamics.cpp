#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "vibrow/dynamics.hpp"
#include "vibrow/errors.hpp"
#include "vibrow/experiments.hpp"
#include "vibrow/metrics.hpp"

using namespace vibrow;

namespace {

constexpr double kPi = std::numbers::pi;

double qubit_population(const DensityMatrix& rq, int a, int b, int c) { return rq.m(4 * a + 2 * b + c, 4 * a + 2 * b + c).real(); }

void check_valid(const DensityMatrix& r) {
  CHECK(std::abs(r.trace() - Complex(1.0)) < 1e-6);
  CHECK(max_abs_diff(r.m, r.m.adjoint()) < 1e-8);
  CHECK(r.min_eigenvalue() >= -1e-6);
}

// one qubit under H = 0, L = sqrt(gamma) sigma_z
struct SingleQubit {
  double gamma = 1e-2;
  Operator h = Operator::zero(SpaceLayout{2});
  std::vector<Operator> ls{std::sqrt(1e-2) * ops::sigma_z()};
  DensityMatrix rho0{SpaceLayout{2}, (Matrix(2, 2) << 0.5, 0.5, 0.5, 0.5).finished()};
};

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("beta parametrisation") {
  const double om = -1.6337e-4;
  CHECK(beta_from_time(1000.0, om) == doctest::Approx(9.0 / (2 * kPi) * 1.6337e-4 * 1000.0));
  CHECK(time_from_beta(beta_from_time(12345.0, om), om) == doctest::Approx(12345.0));
  // beta = 6 alpha / 2 pi with alpha = (3/2) Omega t
  const double t = 777.0;
  CHECK(beta_from_time(t, om) == doctest::Approx(6 * std::abs(alpha_from_time(t, om)) / (2 * kPi)));
  CHECK_THROWS_AS(time_from_beta(1.0, 0.0), std::invalid_argument);

  const TimeGrid g = TimeGrid::uniform_beta(0, 10, 600, om);
  CHECK(g.size() == 600);
  CHECK(g.beta.front() == 0.0);
  CHECK(g.beta.back() == doctest::Approx(10.0));
  for (std::size_t k = 1; k < g.size(); ++k) CHECK(g.times[k] > g.times[k - 1]);
  CHECK_THROWS_AS(TimeGrid::from_times({0.0, 2.0, 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid::uniform_beta(1, 1, 10, om), std::invalid_argument);
}

TEST_CASE("pure evolution of simple Hamiltonians") {
  const PureState plus(SpaceLayout{2}, (Vector(2) << 1, 1).finished() / std::sqrt(2.0));
  const TimeGrid g = TimeGrid::from_times({0.0, 0.5, 1.0, 3.0, 10.0});
  const StateSeries still = evolve_pure(Operator::zero(SpaceLayout{2}), plus, g);
  for (const auto& psi : still.pure) CHECK((psi.amp - plus.amp).norm() < 1e-15);

  const StateSeries larmor = evolve_pure(0.5 * ops::sigma_z(), plus, g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vector& a = larmor.pure[k].amp;
    const double sx = (a.adjoint() * ops::sigma_x().m * a)(0, 0).real();
    CHECK(sx == doctest::Approx(std::cos(g.times[k])).scale(0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(evolve_pure(Operator(SpaceLayout{2}, (Matrix(2, 2) << 0, 1, 0, 0).finished()), plus, g),
                  std::invalid_argument);
}

TEST_CASE("analytic effective-model trajectory") {
  auto a = analytic_w_dynamics(0.0);
  CHECK(std::abs(a[0] - Complex(1.0)) < 1e-15);
  CHECK(std::abs(a[1]) == 0.0);
  a = analytic_w_dynamics(kPi / 3);
  for (const auto& x : a) CHECK(std::norm(x) == doctest::Approx(1.0 / 3).scale(0).epsilon(1e-12));
  a = analytic_w_dynamics(kPi / 2);
  CHECK(std::norm(a[0]) == doctest::Approx(1.0 / 9).scale(0).epsilon(1e-12));
  CHECK(std::norm(a[1]) == doctest::Approx(4.0 / 9).scale(0).epsilon(1e-12));
  CHECK(std::norm(a[2]) == doctest::Approx(4.0 / 9).scale(0).epsilon(1e-12));
  for (double al : {0.1, 0.7, 2.3, 5.9}) {
    const auto b = analytic_w_dynamics(al);
    CHECK(std::norm(b[0]) + std::norm(b[1]) + std::norm(b[2]) == doctest::Approx(1.0).scale(0).epsilon(1e-14));
    // the closed form of the state
    CHECK(std::abs(b[0] - (std::cos(al) + Complex(0, 1.0 / 3) * std::sin(al))) < 1e-14);
    CHECK(std::abs(b[1] - Complex(0, -2.0 / 3) * std::sin(al)) < 1e-14);
  }
}

TEST_CASE("W-time sequences") {
  const WTimes w = w_times(6);
  CHECK(w.beta_w == std::vector<int>{1, 2, 4, 5, 7, 8});
  REQUIRE(w.beta_bc.size() == 6);
  CHECK(w.beta_bc[0] == 1.5);
  CHECK(w.beta_bc[1] == 4.5);
  CHECK(w.beta_bc[2] == 7.5);
  CHECK(2 * w.beta_bc[3] == 21.0);
  CHECK_THROWS_AS(w_times(0), std::invalid_argument);
}

TEST_CASE("closed full-model dynamics") {
  const ModelParams p = ModelParams::canonical();
  const double om = effective_coupling(p);
  for (Frame f : {Frame::polaron, Frame::lab}) {
    CAPTURE(frame_name(f));
    const Operator h = hamiltonian_in_frame(p, f);
    const TimeGrid g = TimeGrid::uniform_beta(0, 10, 241, om);
    const StateSeries s = evolve_pure(h, initial_w_state(p.n_max), g);
    const double e0 = (s.pure[0].amp.adjoint() * h.m * s.pure[0].amp)(0, 0).real();
    double pair_gap = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const auto& a = s.pure[k].amp;
      CHECK(std::abs(a.norm() - 1.0) < 1e-9);
      CHECK(std::abs((a.adjoint() * h.m * a)(0, 0).real() - e0) < 1e-9);
      const DensityMatrix rq = qubit_state(s.pure[k]);
      pair_gap = std::max(pair_gap, std::abs(qubit_population(rq, 0, 1, 0) - qubit_population(rq, 0, 0, 1)));
    }
    CHECK(pair_gap < 1e-3);

    const StateSeries w1 = evolve_pure(h, initial_w_state(p.n_max), TimeGrid::from_beta({1.0}, om));
    CHECK(std::abs(qubit_population(qubit_state(w1.pure[0]), 1, 0, 0) - 1.0 / 3) < 0.02);
  }
}

TEST_CASE("dephasing collapse operator") {
  ModelParams p = ModelParams::canonical();
  p.n_max = 2;
  CHECK(dephasing_collapse_ops(p).empty());
  p.gamma_dephase = 1e-4;
  const auto ls = dephasing_collapse_ops(p);
  REQUIRE(ls.size() == 1);
  CHECK(ls[0].layout == p.layout());
  CHECK(ls[0].m.cwiseAbs().maxCoeff() == doctest::Approx(1e-2));
  CHECK(ls[0].is_hermitian());
  // sigma_z on qubit A only
  const auto i = static_cast<Eigen::Index>(full_index(1, 0, 1, 2, 1, 2));
  CHECK(ls[0].m(i, i).real() == doctest::Approx(-1e-2));
}

TEST_CASE("Lindblad right-hand side") {
  std::mt19937_64 rng(21);
  const SpaceLayout l{2, 3};
  const Operator h(l, testing::random_hermitian(rng, 6));
  const Operator a(l, testing::random_matrix(rng, 6));
  const Operator b(l, testing::random_hermitian(rng, 6));
  const DensityMatrix rho = testing::random_density(rng, l);
  const Matrix d = lindblad_rhs(h, {a, b}, rho);
  CHECK(std::abs(d.trace()) < 1e-12);
  CHECK(max_abs_diff(d, d.adjoint()) < 1e-12);

  const Complex mi(0, -1);
  const Matrix vn = mi * (h.m * rho.m - rho.m * h.m);
  CHECK(max_abs_diff(lindblad_rhs(h, {}, rho), vn) < 1e-14);

  const DensityMatrix mixed(l, Matrix::Identity(6, 6) / 6.0);
  const Matrix dm = lindblad_rhs(h, {b}, mixed);
  CHECK(max_abs_diff(dm, mi * (h.m * mixed.m - mixed.m * h.m)) < 1e-15);

  CHECK_THROWS_AS(lindblad_rhs(h, {Operator::identity(SpaceLayout{6})}, rho), std::invalid_argument);
}

TEST_CASE("single-qubit dephasing decays coherences at 2 Gamma") {
  SingleQubit q;
  const TimeGrid g = TimeGrid::from_times({0.0, 10.0, 50.0, 100.0, 200.0});
  for (auto method : {LindbladMethod::fixed_rk4, LindbladMethod::split_spectral}) {
    CAPTURE(lindblad_method_name(method));
    LindbladOptions o;
    o.method = method;
    const StateSeries s = evolve_lindblad(q.h, q.ls, q.rho0, g, o);
    for (std::size_t k = 0; k < g.size(); ++k) {
      CHECK(std::abs(s.mixed[k].m(0, 1) - 0.5 * std::exp(-2 * q.gamma * g.times[k])) < 1e-6);
      CHECK(std::abs(s.mixed[k].m(0, 0) - 0.5) < 1e-12);
    }
    // fitted log-slope
    const double rate = -std::log(s.mixed.back().m(0, 1).real() / 0.5) / g.times.back();
    CHECK(rate == doctest::Approx(2 * q.gamma).scale(0).epsilon(1e-6));
  }
}

TEST_CASE("closed Lindblad evolution reproduces the pure projector") {
  ModelParams p = ModelParams::canonical();
  p.n_max = 1;
  const Operator h = hamiltonian_in_frame(p, Frame::polaron);
  const PureState psi0 = initial_w_state(p.n_max);
  const TimeGrid g = TimeGrid::from_times({0.0, 5.0, 40.0, 150.0});
  const StateSeries ref = evolve_pure(h, psi0, g);
  for (auto method : {LindbladMethod::fixed_rk4, LindbladMethod::split_spectral}) {
    LindbladOptions o;
    o.method = method;
    const StateSeries s = evolve_lindblad(h, {}, DensityMatrix::from_pure(psi0), g, o);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(max_abs_diff(s.mixed[k].m, ref.density(k).m) < 1e-6);
  }
}

TEST_CASE("both Lindblad integrators agree on the dephased full model") {
  ModelParams p = ModelParams::canonical();
  p.n_max = 1;
  p.gamma_dephase = 1e-3;
  const Operator h = hamiltonian_in_frame(p, Frame::polaron);
  const auto ls = dephasing_collapse_ops(p);
  const DensityMatrix rho0 = DensityMatrix::from_pure(initial_w_state(p.n_max));
  const TimeGrid g = TimeGrid::from_times({0.0, 100.0, 300.0, 600.0});
  LindbladOptions rk;
  LindbladOptions sp;
  sp.method = LindbladMethod::split_spectral;
  sp.split_step = 0.5;
  const StateSeries a = evolve_lindblad(h, ls, rho0, g, rk);
  const StateSeries b = evolve_lindblad(h, ls, rho0, g, sp);
  for (std::size_t k = 0; k < g.size(); ++k) {
    check_valid(a.mixed[k]);
    check_valid(b.mixed[k]);
    CHECK(max_abs_diff(a.mixed[k].m, b.mixed[k].m) < 1e-6);
  }
}

TEST_CASE("integrator outputs stay valid density matrices") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 3; ++trial) {
    const SpaceLayout l{2, 2, 3};
    const Operator h(l, 0.2 * testing::random_hermitian(rng, 12));
    Matrix z = Matrix::Zero(12, 12);
    for (int i = 0; i < 12; ++i) z(i, i) = (i % 3) * 0.1;
    const std::vector<Operator> ls{Operator(l, z), Operator(l, 0.05 * testing::random_matrix(rng, 12))};
    const DensityMatrix rho0 = testing::random_density(rng, l);
    const TimeGrid g = TimeGrid::from_times({0.0, 1.0, 7.5, 20.0});
    for (const auto& r : evolve_lindblad(h, ls, rho0, g).mixed) check_valid(r);
    LindbladOptions sp;
    sp.method = LindbladMethod::split_spectral;
    // the random jump is not diagonal
    CHECK_THROWS_AS(evolve_lindblad(h, ls, rho0, g, sp), std::invalid_argument);
    for (const auto& r : evolve_lindblad(h, {ls[0]}, rho0, g, sp).mixed) check_valid(r);
  }
}

TEST_CASE("an unstable step aborts with diagnostics") {
  const Operator h = 5.0 * ops::sigma_x();
  const DensityMatrix rho0 = DensityMatrix::from_pure(PureState::basis(SpaceLayout{2}, {0}));
  LindbladOptions o;
  o.max_step = 2.0;
  CHECK_THROWS_WITH_AS(evolve_lindblad(h, {}, rho0, TimeGrid::from_times({0.0, 200.0}), o),
                       doctest::Contains("reduce the step size"), NumericalError);
}

TEST_CASE("observer streaming matches the stored series") {
  SingleQubit q;
  const TimeGrid g = TimeGrid::from_times({0.0, 3.0, 9.0});
  std::vector<DensityMatrix> seen;
  const DensityMatrix last = evolve_lindblad(q.h, q.ls, q.rho0, g, {}, [&](std::size_t k, const DensityMatrix& r) {
    CHECK(k == seen.size());
    seen.push_back(r);
  });
  const StateSeries s = evolve_lindblad(q.h, q.ls, q.rho0, g);
  REQUIRE(seen.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(max_abs_diff(seen[k].m, s.mixed[k].m) == 0.0);
  CHECK(max_abs_diff(last.m, s.mixed.back().m) == 0.0);
}

TEST_CASE("pulse schedule") {
  PulseSchedule p;
  p.segments = {{2, 0.0, 10.0, 0.5}, {3, 5.0, 20.0, 0.1}};
  CHECK_NOTHROW(p.validate());
  CHECK(p.rate(2, 3.0) == 0.5);
  CHECK(p.rate(2, 15.0) == 0.0);
  CHECK(p.rate(3, 15.0) == 0.1);
  CHECK(p.breakpoints() == std::vector<double>{0.0, 5.0, 10.0, 20.0});
  p.segments.push_back({2, 9.0, 12.0, 0.1});
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.segments = {{2, 0.0, 1.0, -0.1}};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

}  // TEST_SUITE

TEST_SUITE("mcwf") {

TEST_CASE("no collapse operators: every trajectory is the pure evolution") {
  ModelParams p = ModelParams::canonical();
  p.n_max = 1;
  const Operator h = hamiltonian_in_frame(p, Frame::polaron);
  const PureState psi0 = initial_w_state(p.n_max);
  const TimeGrid g = TimeGrid::from_times({0.0, 50.0, 500.0});
  const StateSeries ref = evolve_pure(h, psi0, g);
  const TrajectoryAverage avg = mcwf_evolve(h, {}, psi0, g, {7, 3, 1}, {{}, {psi0}});
  CHECK(avg.jumps == 0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(max_abs_diff(avg.reduced[k].m, ref.density(k).m) < 1e-12);
    CHECK(avg.target_population[0][k] == doctest::Approx(fidelity(ref.pure[k], psi0)).scale(0).epsilon(1e-12));
  }
}

TEST_CASE("single-qubit dephasing rate from 2000 trajectories") {
  SingleQubit q;
  const PureState plus(SpaceLayout{2}, (Vector(2) << 1, 1).finished() / std::sqrt(2.0));
  const TimeGrid g = TimeGrid::from_times({0.0, 10.0, 20.0, 30.0, 40.0, 50.0});
  const TrajectoryAverage avg = mcwf_evolve(q.h, q.ls, plus, g, {2000, 17, 0});
  // least-squares slope of log rho01
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double x = g.times[k], y = std::log(avg.reduced[k].m(0, 1).real() / 0.5);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(g.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(-slope == doctest::Approx(2 * q.gamma).scale(0).epsilon(0.05));
}

TEST_CASE("seed determinism and thread independence") {
  ModelParams p = ModelParams::canonical();
  p.n_max = 1;
  p.gamma_dephase = 1e-3;
  const Operator h = hamiltonian_in_frame(p, Frame::polaron);
  const auto ls = dephasing_collapse_ops(p);
  const PureState psi0 = initial_w_state(p.n_max);
  const TimeGrid g = TimeGrid::from_times({0.0, 300.0, 900.0});
  const McwfObservables obs{{0, 1, 2}, {target_w_state(1, 1)}};
  const auto a = mcwf_evolve(h, ls, psi0, g, {40, 5, 1}, obs);
  const auto b = mcwf_evolve(h, ls, psi0, g, {40, 5, 3}, obs);
  const auto c = mcwf_evolve(h, ls, psi0, g, {40, 6, 1}, obs);
  CHECK(a.jumps == b.jumps);
  bool differs = false;
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(max_abs_diff(a.reduced[k].m, b.reduced[k].m) == 0.0);
    CHECK(a.target_population[0][k] == b.target_population[0][k]);
    differs = differs || max_abs_diff(a.reduced[k].m, c.reduced[k].m) > 0.0;
  }
  CHECK(differs);
  CHECK(trajectory_seed(5, 0) != trajectory_seed(5, 1));
  CHECK(trajectory_seed(5, 3) == trajectory_seed(5, 3));
}

TEST_CASE("trajectory error shrinks like n_traj^-1/2") {
  SingleQubit q;
  q.ls = {std::sqrt(q.gamma) * ops::sigma_z()};
  const Operator h = 0.02 * ops::sigma_x();
  const PureState psi0 = PureState::basis(SpaceLayout{2}, {0});
  const TimeGrid g = TimeGrid::from_times({0.0, 40.0, 80.0});
  LindbladOptions o;
  const StateSeries ref = evolve_lindblad(h, q.ls, DensityMatrix::from_pure(psi0), g, o);
  // mean error over independent seeds
  auto err = [&](int n) {
    double e = 0.0;
    const int reps = 24;
    for (int r = 0; r < reps; ++r) {
      const auto avg = mcwf_evolve(h, q.ls, psi0, g, {n, static_cast<std::uint64_t>(1000 + r), 1});
      e += std::abs(avg.reduced[2].m(0, 0).real() - ref.mixed[2].m(0, 0).real());
    }
    return e / reps;
  };
  const double e125 = err(125), e500 = err(500), e2000 = err(2000);
  CHECK(e500 < e125);
  CHECK(e2000 < e500);
  const double slope = std::log(e2000 / e125) / std::log(16.0);
  CHECK(slope == doctest::Approx(-0.5).scale(0).epsilon(0.4));
}

TEST_CASE("invalid trajectory input") {
  SingleQubit q;
  const PureState psi0 = PureState::basis(SpaceLayout{2}, {0});
  CHECK_THROWS_AS(mcwf_evolve(q.h, q.ls, psi0, TimeGrid::from_times({0.0, 1.0}), {0, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(mcwf_evolve(q.h, {ops::identity(3)}, psi0, TimeGrid::from_times({0.0, 1.0}), {}), std::invalid_argument);
}

}  // TEST_SUITE
