#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "vibrow/dynamics.hpp"
#include "vibrow/errors.hpp"

namespace vibrow {

std::uint64_t trajectory_seed(std::uint64_t seed, std::uint64_t trajectory) {
  // splitmix64 of the combined key
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (trajectory + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

constexpr int kChunk = 8;

// psi(tau) = R diag(exp(-i mu tau)) R^-1 psi for H_eff = H - i/2 sum L^dag L.
// When sum L^dag L is a multiple c of the identity the eigenbasis of H is used
// and the norm decays as exp(-c tau) exactly.
struct NoJumpPropagator {
  Matrix right;
  Matrix right_inv;
  Vector mu;
  bool scalar_decay = false;
  double decay = 0.0;

  NoJumpPropagator(const Operator& h, const std::vector<Operator>& ls) {
    const auto n = h.m.rows();
    Matrix a = Matrix::Zero(n, n);
    for (const auto& l : ls) a += l.m.adjoint() * l.m;
    const Complex c = n > 0 ? a(0, 0) : Complex(0.0);
    const double scale = std::max(1.0, std::abs(c));
    if (max_abs_diff(a, c * Matrix::Identity(n, n)) <= 1e-12 * scale) {
      const EigenSystem es = hermitian_eig(h);
      right = es.vectors;
      right_inv = es.vectors.adjoint();
      decay = c.real();
      mu = es.values.cast<Complex>() - Complex(0.0, 0.5 * decay) * Vector::Ones(n);
      scalar_decay = true;
    } else {
      Eigen::ComplexEigenSolver<Matrix> ces(h.m - Complex(0.0, 0.5) * a);
      if (ces.info() != Eigen::Success) throw NumericalError("mcwf_evolve: non-Hermitian eigensolver failed");
      right = ces.eigenvectors();
      mu = ces.eigenvalues();
      Eigen::PartialPivLU<Matrix> lu(right);
      right_inv = lu.inverse();
      const double resid = max_abs_diff(right * right_inv, Matrix::Identity(n, n));
      if (resid > 1e-8) throw NumericalError("mcwf_evolve: effective Hamiltonian is numerically defective");
    }
  }

  Vector coefficients(const Vector& psi) const { return right_inv * psi; }

  Vector evolve(const Vector& coeff, double tau) const {
    const Vector ph = (Complex(0, -1) * tau * mu).array().exp().matrix();
    return right * ph.cwiseProduct(coeff);
  }
};

struct Accumulator {
  std::vector<Matrix> reduced;
  std::vector<std::vector<double>> target_pop;
  std::uint64_t jumps = 0;

  Accumulator(std::size_t samples, Eigen::Index reduced_dim, std::size_t targets)
      : reduced(samples, Matrix::Zero(reduced_dim, reduced_dim)),
        target_pop(targets, std::vector<double>(samples, 0.0)) {}

  void add(const Accumulator& o) {
    for (std::size_t k = 0; k < reduced.size(); ++k) reduced[k] += o.reduced[k];
    for (std::size_t j = 0; j < target_pop.size(); ++j)
      for (std::size_t k = 0; k < target_pop[j].size(); ++k) target_pop[j][k] += o.target_pop[j][k];
    jumps += o.jumps;
  }
};

class Trajectory {
 public:
  Trajectory(const NoJumpPropagator& prop, const std::vector<Operator>& ls, const PureState& psi0,
             const TimeGrid& grid, const McwfObservables& obs, bool keep_all)
      : prop_(prop), ls_(ls), psi0_(psi0), grid_(grid), obs_(obs), keep_all_(keep_all) {}

  void run(std::uint64_t seed, Accumulator& acc) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    auto draw_threshold = [&] { return 1.0 - uni(rng); };  // (0, 1]

    Vector psi = psi0_.amp;
    Vector coeff = prop_.coefficients(psi);
    double t_ref = 0.0;  // time at which psi (norm 1) was set
    double r = draw_threshold();

    auto norm2 = [&](double t) { return prop_.evolve(coeff, t - t_ref).squaredNorm(); };

    for (std::size_t k = 0; k < grid_.size(); ++k) {
      const double t_k = grid_.times[k];
      while (!ls_.empty()) {
        double t_jump;
        if (prop_.scalar_decay) {
          if (prop_.decay <= 0.0) break;
          t_jump = t_ref - std::log(r) / prop_.decay;
          if (t_jump > t_k) break;
        } else {
          if (norm2(t_k) > r) break;
          double lo = t_ref, hi = t_k;
          for (int it = 0; it < 100 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            (norm2(mid) > r ? lo : hi) = mid;
          }
          t_jump = hi;
        }
        Vector pre = prop_.evolve(coeff, t_jump - t_ref);
        pre /= pre.norm();
        std::vector<double> w(ls_.size());
        std::vector<Vector> out(ls_.size());
        double total = 0.0;
        for (std::size_t j = 0; j < ls_.size(); ++j) {
          out[j] = ls_[j].m * pre;
          w[j] = out[j].squaredNorm();
          total += w[j];
        }
        if (!(total > 0.0)) throw NumericalError("mcwf_evolve: jump with vanishing rate");
        double u = uni(rng) * total;
        std::size_t pick = ls_.size() - 1;
        for (std::size_t j = 0; j < ls_.size(); ++j) {
          if (u < w[j]) {
            pick = j;
            break;
          }
          u -= w[j];
        }
        psi = out[pick] / std::sqrt(w[pick]);
        coeff = prop_.coefficients(psi);
        t_ref = t_jump;
        r = draw_threshold();
        ++acc.jumps;
      }
      Vector now = prop_.evolve(coeff, t_k - t_ref);
      now /= now.norm();
      if (keep_all_) {
        acc.reduced[k] += now * now.adjoint();
      } else {
        const PureState s(psi0_.layout, now);
        acc.reduced[k] += partial_trace(s, obs_.keep).m;
      }
      for (std::size_t j = 0; j < obs_.targets.size(); ++j)
        acc.target_pop[j][k] += std::norm(obs_.targets[j].amp.dot(now));
    }
  }

 private:
  const NoJumpPropagator& prop_;
  const std::vector<Operator>& ls_;
  const PureState& psi0_;
  const TimeGrid& grid_;
  const McwfObservables& obs_;
  bool keep_all_;
};

}  // namespace

TrajectoryAverage mcwf_evolve(const Operator& h, const std::vector<Operator>& ls, const PureState& psi0,
                              const TimeGrid& grid, const McwfOptions& opts, const McwfObservables& obs) {
  if (opts.n_traj < 1) throw std::invalid_argument("mcwf_evolve: n_traj must be >= 1");
  if (!(h.layout == psi0.layout)) throw std::invalid_argument("mcwf_evolve: H and psi0 layouts differ");
  if (!h.is_hermitian()) throw std::invalid_argument("mcwf_evolve: H is not Hermitian");
  for (const auto& l : ls)
    if (!(l.layout == h.layout)) throw std::invalid_argument("mcwf_evolve: collapse operator layout differs");
  for (const auto& t : obs.targets)
    if (!(t.layout == h.layout)) throw std::invalid_argument("mcwf_evolve: target layout differs");
  psi0.validate();
  grid.validate();

  const bool keep_all = obs.keep.empty() || obs.keep.size() == psi0.layout.factors();
  std::vector<std::size_t> kept;
  if (keep_all) {
    for (std::size_t f = 0; f < psi0.layout.factors(); ++f) kept.push_back(f);
  } else {
    kept.assign(obs.keep.begin(), obs.keep.end());
  }
  const SpaceLayout reduced_layout = psi0.layout.subset(kept);
  const auto rdim = static_cast<Eigen::Index>(reduced_layout.total());

  const NoJumpPropagator prop(h, ls);
  const Trajectory traj(prop, ls, psi0, grid, obs, keep_all);

  const int n_chunks = (opts.n_traj + kChunk - 1) / kChunk;
  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n_chunks));

  Accumulator total(grid.size(), rdim, obs.targets.size());
  std::map<int, Accumulator> pending;
  int next_merge = 0;
  std::mutex mtx;
  std::atomic<int> next_chunk{0};
  std::exception_ptr failure;

  auto worker = [&] {
    try {
      for (int c = next_chunk++; c < n_chunks; c = next_chunk++) {
        Accumulator acc(grid.size(), rdim, obs.targets.size());
        const int first = c * kChunk;
        const int last = std::min(opts.n_traj, first + kChunk);
        for (int i = first; i < last; ++i)
          traj.run(trajectory_seed(opts.seed, static_cast<std::uint64_t>(i)), acc);
        std::lock_guard lock(mtx);
        pending.emplace(c, std::move(acc));
        // merge in chunk order so the floating-point sum does not depend on scheduling
        for (auto it = pending.find(next_merge); it != pending.end(); it = pending.find(next_merge)) {
          total.add(it->second);
          pending.erase(it);
          ++next_merge;
        }
      }
    } catch (...) {
      std::lock_guard lock(mtx);
      if (!failure) failure = std::current_exception();
      next_chunk = n_chunks;
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  TrajectoryAverage out;
  out.grid = grid;
  out.n_traj = opts.n_traj;
  out.jumps = total.jumps;
  const double inv = 1.0 / static_cast<double>(opts.n_traj);
  out.reduced.reserve(grid.size());
  for (auto& m : total.reduced) out.reduced.emplace_back(reduced_layout, inv * m);
  out.target_population = std::move(total.target_pop);
  for (auto& row : out.target_population)
    for (auto& v : row) v *= inv;
  return out;
}

}  // namespace vibrow
