#include <cmath>
#include <optional>
#include <sstream>

#include <Eigen/Sparse>

#include "vibrow/dynamics.hpp"
#include "vibrow/errors.hpp"

namespace vibrow {

namespace {

using Sparse = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

bool is_diagonal(const Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (r != c && m(r, c) != Complex(0.0)) return false;
  return true;
}

double density(const Matrix& m) {
  return static_cast<double>((m.array() != Complex(0.0)).count()) / static_cast<double>(m.size());
}

// L(rho) for Hermitian rho: G rho + (G rho)^dag + sum_k L_k rho L_k^dag with
// G = -i H - 1/2 sum_k L_k^dag L_k.
class Generator {
 public:
  Generator(const Operator& h, const std::vector<Operator>& ls) : dim_(h.m.rows()) {
    Matrix g = Complex(0, -1) * h.m;
    diag_weights_ = Matrix::Zero(dim_, dim_);
    decay_ = RealVector::Zero(dim_);
    for (const auto& l : ls) {
      if (!(l.layout == h.layout)) throw std::invalid_argument("evolve_lindblad: collapse operator layout differs");
      g -= 0.5 * (l.m.adjoint() * l.m);
      if (is_diagonal(l.m)) {
        const Vector d = l.m.diagonal();
        diag_weights_ += d * d.adjoint();
        decay_ += d.cwiseAbs2();
        has_diag_ = true;
      } else {
        general_.push_back(l.m.sparseView());
        general_adj_.push_back(Sparse(l.m.adjoint().sparseView()));
      }
    }
    if (density(g) < 0.25) {
      g_sparse_ = g.sparseView();
      use_sparse_ = true;
    } else {
      g_dense_ = std::move(g);
    }
    tmp_.resize(dim_, dim_);
  }

  bool all_diagonal() const { return general_.empty(); }
  const Matrix& diag_weights() const { return diag_weights_; }
  const RealVector& decay() const { return decay_; }

  void apply(const Matrix& rho, Matrix& out) {
    if (use_sparse_)
      tmp_.noalias() = g_sparse_ * rho;
    else
      tmp_.noalias() = g_dense_ * rho;
    out = tmp_ + tmp_.adjoint();
    if (has_diag_) out += diag_weights_.cwiseProduct(rho);
    for (std::size_t k = 0; k < general_.size(); ++k) {
      tmp_.noalias() = general_[k] * rho;
      out += tmp_ * general_adj_[k];
    }
  }

 private:
  Eigen::Index dim_;
  bool use_sparse_ = false;
  bool has_diag_ = false;
  Sparse g_sparse_;
  Matrix g_dense_;
  Matrix diag_weights_;
  RealVector decay_;
  std::vector<Sparse> general_;
  std::vector<Sparse> general_adj_;
  Matrix tmp_;
};

void check_state(const Matrix& rho, double t, const LindbladOptions& opts) {
  const double tr_err = std::abs(rho.trace() - Complex(1.0));
  const double herm = max_abs_diff(rho, rho.adjoint());
  double lmin = 0.0;
  if (tr_err <= opts.trace_tol && herm <= opts.hermiticity_tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    lmin = es.eigenvalues().minCoeff();
    if (lmin >= opts.positivity_floor) return;
  }
  std::ostringstream os;
  os << "evolve_lindblad: state left tolerance at t = " << t << " (|tr - 1| = " << tr_err
     << ", hermiticity = " << herm << ", min eigenvalue = " << lmin
     << "); reduce the step size";
  throw NumericalError(os.str());
}

class Rk4 {
 public:
  Rk4(const Operator& h, const std::vector<Operator>& ls, double max_step)
      : gen_(h, ls), max_step_(max_step) {
    if (!(max_step > 0.0)) throw std::invalid_argument("evolve_lindblad: max_step must be > 0");
  }

  void advance(Matrix& rho, double dt) {
    if (dt <= 0.0) return;
    const auto n = static_cast<long>(std::ceil(dt / max_step_ - 1e-12));
    const double h = dt / static_cast<double>(n);
    for (long s = 0; s < n; ++s) {
      gen_.apply(rho, k1_);
      stage_ = rho + (0.5 * h) * k1_;
      gen_.apply(stage_, k2_);
      stage_ = rho + (0.5 * h) * k2_;
      gen_.apply(stage_, k3_);
      stage_ = rho + h * k3_;
      gen_.apply(stage_, k4_);
      rho += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    }
  }

 private:
  Generator gen_;
  double max_step_;
  Matrix k1_, k2_, k3_, k4_, stage_;
};

// Strang splitting: exact decay factors of diagonal collapse operators around
// an exact unitary step in the eigenbasis of H.
class SplitSpectral {
 public:
  SplitSpectral(const Operator& h, const std::vector<Operator>& ls, double step)
      : es_(hermitian_eig(h)), step_(step) {
    if (!(step > 0.0)) throw std::invalid_argument("evolve_lindblad: split_step must be > 0");
    Generator gen(h, ls);
    if (!gen.all_diagonal())
      throw std::invalid_argument(
          "evolve_lindblad: split_spectral requires collapse operators diagonal in the product basis");
    const auto n = h.m.rows();
    rate_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        rate_(i, j) = gen.diag_weights()(i, j) - 0.5 * (gen.decay()(i) + gen.decay()(j));
  }

  void advance(Matrix& rho, double dt) {
    if (dt <= 0.0) return;
    const auto n = static_cast<long>(std::ceil(dt / step_ - 1e-12));
    const double h = dt / static_cast<double>(n);
    if (!cached_h_ || *cached_h_ != h) {
      unitary_ = propagator(es_, h);
      half_decay_ = (0.5 * h * rate_).array().exp().matrix();
      cached_h_ = h;
    }
    for (long s = 0; s < n; ++s) {
      rho = half_decay_.cwiseProduct(rho);
      tmp_.noalias() = unitary_ * rho;
      rho.noalias() = tmp_ * unitary_.adjoint();
      rho = half_decay_.cwiseProduct(rho);
    }
  }

 private:
  EigenSystem es_;
  double step_;
  Matrix rate_;
  std::optional<double> cached_h_;
  Matrix unitary_, half_decay_, tmp_;
};

// Basis partition into sectors closed under H and sum L^dag L, where every
// collapse operator maps each sector into a single sector and rho0 has no
// coherence between sectors. The state then stays block-diagonal.
struct Sectors {
  std::vector<std::vector<Eigen::Index>> members;
  struct Jump {
    std::size_t from;
    std::size_t to;
    Matrix op;
  };
  std::vector<Jump> jumps;
};

std::optional<Sectors> find_sectors(const Operator& h, const std::vector<Operator>& ls, const Matrix& rho0) {
  const auto n = h.m.rows();
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](Eigen::Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  auto unite = [&](Eigen::Index a, Eigen::Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };
  Matrix coupled = h.m;
  for (const auto& l : ls) coupled += l.m.adjoint() * l.m;
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r)
      if (r != c && (coupled(r, c) != Complex(0.0) || rho0(r, c) != Complex(0.0))) unite(r, c);

  std::vector<std::size_t> sector_of(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> root_id(static_cast<std::size_t>(n), -1);
  Sectors s;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = find(i);
    if (root_id[r] < 0) {
      root_id[r] = static_cast<Eigen::Index>(s.members.size());
      s.members.emplace_back();
    }
    sector_of[i] = static_cast<std::size_t>(root_id[r]);
    s.members[sector_of[i]].push_back(i);
  }
  if (s.members.size() < 2) return std::nullopt;

  for (const auto& l : ls) {
    std::vector<long> target(s.members.size(), -1);
    for (Eigen::Index c = 0; c < n; ++c)
      for (Eigen::Index r = 0; r < n; ++r) {
        if (l.m(r, c) == Complex(0.0)) continue;
        auto& t = target[sector_of[c]];
        if (t < 0) t = static_cast<long>(sector_of[r]);
        if (t != static_cast<long>(sector_of[r])) return std::nullopt;
      }
    for (std::size_t from = 0; from < target.size(); ++from) {
      if (target[from] < 0) continue;
      const auto to = static_cast<std::size_t>(target[from]);
      const auto& rows = s.members[to];
      const auto& cols = s.members[from];
      Matrix op(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < cols.size(); ++b) op(a, b) = l.m(rows[a], cols[b]);
      s.jumps.push_back({from, to, std::move(op)});
    }
  }
  return s;
}

class BlockRk4 {
 public:
  BlockRk4(const Operator& h, const std::vector<Operator>& ls, Sectors sectors, double max_step)
      : sectors_(std::move(sectors)), max_step_(max_step) {
    if (!(max_step > 0.0)) throw std::invalid_argument("evolve_lindblad: max_step must be > 0");
    Matrix g = Complex(0, -1) * h.m;
    for (const auto& l : ls) g -= 0.5 * (l.m.adjoint() * l.m);
    for (const auto& idx : sectors_.members) {
      Matrix gs = extract(g, idx, idx);
      sparse_.push_back(density(gs) < 0.25);
      g_sparse_.push_back(sparse_.back() ? Sparse(gs.sparseView()) : Sparse());
      g_.push_back(sparse_.back() ? Matrix() : std::move(gs));
    }
    for (const auto& j : sectors_.jumps) {
      j_.push_back(j.op.sparseView());
      j_adj_.push_back(Sparse(j.op.adjoint().sparseView()));
    }
    const auto nb = sectors_.members.size();
    k1_.resize(nb);
    k2_.resize(nb);
    k3_.resize(nb);
    k4_.resize(nb);
    stage_.resize(nb);
  }

  std::vector<Matrix> split(const Matrix& rho) const {
    std::vector<Matrix> b;
    for (const auto& idx : sectors_.members) b.push_back(extract(rho, idx, idx));
    return b;
  }

  void merge(const std::vector<Matrix>& b, Matrix& rho) const {
    rho.setZero();
    for (std::size_t s = 0; s < b.size(); ++s) {
      const auto& idx = sectors_.members[s];
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) rho(idx[i], idx[j]) = b[s](i, j);
    }
  }

  void advance(std::vector<Matrix>& rho, double dt) {
    if (dt <= 0.0) return;
    const auto n = static_cast<long>(std::ceil(dt / max_step_ - 1e-12));
    const double h = dt / static_cast<double>(n);
    for (long step = 0; step < n; ++step) {
      apply(rho, k1_);
      for (std::size_t s = 0; s < rho.size(); ++s) stage_[s] = rho[s] + (0.5 * h) * k1_[s];
      apply(stage_, k2_);
      for (std::size_t s = 0; s < rho.size(); ++s) stage_[s] = rho[s] + (0.5 * h) * k2_[s];
      apply(stage_, k3_);
      for (std::size_t s = 0; s < rho.size(); ++s) stage_[s] = rho[s] + h * k3_[s];
      apply(stage_, k4_);
      for (std::size_t s = 0; s < rho.size(); ++s)
        rho[s] += (h / 6.0) * (k1_[s] + 2.0 * k2_[s] + 2.0 * k3_[s] + k4_[s]);
    }
  }

 private:
  static Matrix extract(const Matrix& m, const std::vector<Eigen::Index>& rows,
                        const std::vector<Eigen::Index>& cols) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t b = 0; b < cols.size(); ++b) out(a, b) = m(rows[a], cols[b]);
    return out;
  }

  void apply(const std::vector<Matrix>& rho, std::vector<Matrix>& out) {
    for (std::size_t s = 0; s < rho.size(); ++s) {
      if (sparse_[s])
        tmp_.noalias() = g_sparse_[s] * rho[s];
      else
        tmp_.noalias() = g_[s] * rho[s];
      out[s] = tmp_ + tmp_.adjoint();
    }
    for (std::size_t k = 0; k < sectors_.jumps.size(); ++k) {
      const auto& j = sectors_.jumps[k];
      tmp_.noalias() = j_[k] * rho[j.from];
      out[j.to] += tmp_ * j_adj_[k];
    }
  }

  Sectors sectors_;
  double max_step_;
  std::vector<Matrix> g_;
  std::vector<Sparse> g_sparse_;
  std::vector<bool> sparse_;
  std::vector<Sparse> j_, j_adj_;
  std::vector<Matrix> k1_, k2_, k3_, k4_, stage_;
  Matrix tmp_;
};

}  // namespace

DensityMatrix evolve_lindblad(const Operator& h, const std::vector<Operator>& ls, const DensityMatrix& rho0,
                              const TimeGrid& grid, const LindbladOptions& opts, const DensityObserver& observer) {
  if (!(h.layout == rho0.layout)) throw std::invalid_argument("evolve_lindblad: H and rho0 layouts differ");
  if (!h.is_hermitian()) throw std::invalid_argument("evolve_lindblad: H is not Hermitian");
  rho0.validate();
  grid.validate();

  Matrix rho = rho0.m;
  double t = 0.0;
  auto run = [&](auto& stepper) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      stepper.advance(rho, grid.times[k] - t);
      t = grid.times[k];
      check_state(rho, t, opts);
      if (observer) observer(k, DensityMatrix(rho0.layout, rho));
    }
  };
  if (opts.method == LindbladMethod::fixed_rk4) {
    if (auto sectors = find_sectors(h, ls, rho0.m)) {
      BlockRk4 stepper(h, ls, std::move(*sectors), opts.max_step);
      auto blocks = stepper.split(rho);
      for (std::size_t k = 0; k < grid.size(); ++k) {
        stepper.advance(blocks, grid.times[k] - t);
        t = grid.times[k];
        stepper.merge(blocks, rho);
        check_state(rho, t, opts);
        if (observer) observer(k, DensityMatrix(rho0.layout, rho));
      }
      return {rho0.layout, std::move(rho)};
    }
    Rk4 stepper(h, ls, opts.max_step);
    run(stepper);
  } else {
    SplitSpectral stepper(h, ls, opts.split_step);
    run(stepper);
  }
  return {rho0.layout, std::move(rho)};
}

StateSeries evolve_lindblad(const Operator& h, const std::vector<Operator>& ls, const DensityMatrix& rho0,
                            const TimeGrid& grid, const LindbladOptions& opts) {
  StateSeries out;
  out.grid = grid;
  out.mixed.reserve(grid.size());
  evolve_lindblad(h, ls, rho0, grid, opts,
                  [&](std::size_t, const DensityMatrix& rho) { out.mixed.push_back(rho); });
  return out;
}

}  // namespace vibrow
