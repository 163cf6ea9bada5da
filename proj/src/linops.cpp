#include "vibrow/linops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace vibrow {

SpaceLayout::SpaceLayout(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  for (auto d : dims_) {
    if (d < 1) throw std::invalid_argument("SpaceLayout: every dimension must be >= 1");
    total_ *= d;
  }
}

SpaceLayout SpaceLayout::full_model(int n_max) {
  if (n_max < 1) throw std::invalid_argument("SpaceLayout::full_model: n_max must be >= 1");
  const auto nb = static_cast<std::size_t>(n_max + 1);
  return SpaceLayout({2, 2, 2, nb, nb});
}

SpaceLayout SpaceLayout::concat(const SpaceLayout& other) const {
  auto d = dims_;
  d.insert(d.end(), other.dims_.begin(), other.dims_.end());
  return SpaceLayout(std::move(d));
}

SpaceLayout SpaceLayout::subset(const std::vector<std::size_t>& keep) const {
  std::vector<std::size_t> d;
  for (auto f : keep) d.push_back(dims_.at(f));
  return SpaceLayout(std::move(d));
}

Operator::Operator(SpaceLayout layout_, Matrix m_) : layout(std::move(layout_)), m(std::move(m_)) {
  const auto n = static_cast<Eigen::Index>(layout.total());
  if (m.rows() != n || m.cols() != n) {
    std::ostringstream os;
    os << "Operator: matrix is " << m.rows() << "x" << m.cols() << " but layout has dimension " << n;
    throw std::invalid_argument(os.str());
  }
}

Operator Operator::identity(const SpaceLayout& layout) {
  const auto n = static_cast<Eigen::Index>(layout.total());
  return {layout, Matrix::Identity(n, n)};
}

Operator Operator::zero(const SpaceLayout& layout) {
  const auto n = static_cast<Eigen::Index>(layout.total());
  return {layout, Matrix::Zero(n, n)};
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

double Operator::hermiticity_error() const { return max_abs_diff(m, m.adjoint()); }

static void require_same_layout(const SpaceLayout& a, const SpaceLayout& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": layout mismatch");
}

Operator Operator::operator+(const Operator& rhs) const {
  require_same_layout(layout, rhs.layout, "Operator::operator+");
  return {layout, m + rhs.m};
}

Operator Operator::operator-(const Operator& rhs) const {
  require_same_layout(layout, rhs.layout, "Operator::operator-");
  return {layout, m - rhs.m};
}

Operator Operator::operator*(const Operator& rhs) const {
  require_same_layout(layout, rhs.layout, "Operator::operator*");
  return {layout, m * rhs.m};
}

Operator& Operator::operator+=(const Operator& rhs) {
  require_same_layout(layout, rhs.layout, "Operator::operator+=");
  m += rhs.m;
  return *this;
}

PureState::PureState(SpaceLayout layout_, Vector amp_) : layout(std::move(layout_)), amp(std::move(amp_)) {
  if (amp.size() != static_cast<Eigen::Index>(layout.total()))
    throw std::invalid_argument("PureState: amplitude vector does not match layout");
}

namespace {

std::vector<std::size_t> strides(const SpaceLayout& layout) {
  std::vector<std::size_t> s(layout.factors(), 1);
  for (std::size_t f = layout.factors(); f-- > 1;) s[f - 1] = s[f] * layout.dim(f);
  return s;
}

// Flat offsets contributed by the factors in `which`, enumerated row-major over those factors.
std::vector<std::size_t> offsets(const SpaceLayout& layout, const std::vector<std::size_t>& which) {
  const auto st = strides(layout);
  std::vector<std::size_t> out{0};
  for (auto f : which) {
    std::vector<std::size_t> next;
    next.reserve(out.size() * layout.dim(f));
    for (auto base : out)
      for (std::size_t d = 0; d < layout.dim(f); ++d) next.push_back(base + d * st[f]);
    out = std::move(next);
  }
  return out;
}

std::vector<std::size_t> complement(const SpaceLayout& layout, const std::set<std::size_t>& keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  std::vector<std::size_t> traced;
  for (std::size_t f = 0; f < layout.factors(); ++f)
    if (!keep.contains(f)) traced.push_back(f);
  if (*keep.rbegin() >= layout.factors())
    throw std::invalid_argument("partial_trace: factor index out of range");
  return traced;
}

}  // namespace

PureState PureState::basis(const SpaceLayout& layout, const std::vector<std::size_t>& digits) {
  if (digits.size() != layout.factors())
    throw std::invalid_argument("PureState::basis: one digit per factor required");
  const auto st = strides(layout);
  std::size_t idx = 0;
  for (std::size_t f = 0; f < digits.size(); ++f) {
    if (digits[f] >= layout.dim(f)) throw std::invalid_argument("PureState::basis: digit out of range");
    idx += digits[f] * st[f];
  }
  Vector v = Vector::Zero(static_cast<Eigen::Index>(layout.total()));
  v(static_cast<Eigen::Index>(idx)) = 1.0;
  return {layout, std::move(v)};
}

void PureState::validate(double tol) const {
  if (std::abs(norm() - 1.0) > tol) {
    std::ostringstream os;
    os << "PureState: norm " << norm() << " differs from 1";
    throw std::invalid_argument(os.str());
  }
}

DensityMatrix::DensityMatrix(SpaceLayout layout_, Matrix m_) : layout(std::move(layout_)), m(std::move(m_)) {
  const auto n = static_cast<Eigen::Index>(layout.total());
  if (m.rows() != n || m.cols() != n)
    throw std::invalid_argument("DensityMatrix: matrix does not match layout");
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  return {psi.layout, psi.amp * psi.amp.adjoint()};
}

double DensityMatrix::purity() const { return (m * m).trace().real(); }

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void DensityMatrix::validate(double herm_tol, double trace_tol, double floor) const {
  const double herm = max_abs_diff(m, m.adjoint());
  if (herm > herm_tol) {
    std::ostringstream os;
    os << "DensityMatrix: not Hermitian (max |rho - rho^dag| = " << herm << ")";
    throw std::invalid_argument(os.str());
  }
  const Complex tr = trace();
  if (std::abs(tr - 1.0) > trace_tol) {
    std::ostringstream os;
    os << "DensityMatrix: trace " << tr.real() << " differs from 1";
    throw std::invalid_argument(os.str());
  }
  const double lmin = min_eigenvalue();
  if (lmin < floor) {
    std::ostringstream os;
    os << "DensityMatrix: minimum eigenvalue " << lmin << " below " << floor;
    throw std::invalid_argument(os.str());
  }
}

namespace ops {

Operator identity(std::size_t dim) { return Operator::identity(SpaceLayout({dim})); }

Operator sigma_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return {SpaceLayout({2}), m};
}

Operator sigma_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return {SpaceLayout({2}), m};
}

Operator sigma_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return {SpaceLayout({2}), m};
}

Operator sigma_plus() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return {SpaceLayout({2}), m};
}

Operator sigma_minus() {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 0) = 1.0;
  return {SpaceLayout({2}), m};
}

Operator projector(std::size_t level, std::size_t dim) {
  if (level >= dim) throw std::invalid_argument("projector: level out of range");
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m(static_cast<Eigen::Index>(level), static_cast<Eigen::Index>(level)) = 1.0;
  return {SpaceLayout({dim}), m};
}

}  // namespace ops

Operator kron(std::span<const Operator> factors) {
  if (factors.empty()) throw std::invalid_argument("kron: empty factor list");
  Operator acc = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) {
    const Matrix& a = acc.m;
    const Matrix& b = factors[i].m;
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c)
        out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    acc = Operator(acc.layout.concat(factors[i].layout), std::move(out));
  }
  return acc;
}

Operator kron(std::initializer_list<Operator> factors) {
  return kron(std::span<const Operator>(factors.begin(), factors.size()));
}

Operator kron_sum(const Operator& site_op, const std::array<double, 3>& coeffs) {
  if (site_op.dim() != 2) throw std::invalid_argument("kron_sum: site operator must be 2x2");
  const Operator id = ops::identity(2);
  const Operator site(SpaceLayout({2}), site_op.m);
  return coeffs[0] * kron({site, id, id}) + coeffs[1] * kron({id, site, id}) +
         coeffs[2] * kron({id, id, site});
}

Ladder boson_ladder(int n_max) {
  if (n_max < 1) throw std::invalid_argument("boson_ladder: n_max must be >= 1");
  const auto n = static_cast<Eigen::Index>(n_max + 1);
  Matrix b = Matrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) b(k - 1, k) = std::sqrt(static_cast<double>(k));
  const SpaceLayout layout({static_cast<std::size_t>(n)});
  return {Operator(layout, b), Operator(layout, b.adjoint())};
}

Operator displacement(double lambda, int n_max) {
  const auto [b, b_dag] = boson_ladder(n_max);
  // K = i lambda (B^dag - B) is Hermitian and D = exp(-i K).
  const Matrix k = Complex(0, 1) * lambda * (b_dag.m - b.m);
  const EigenSystem es = hermitian_eig(k);
  return {b.layout, propagator(es, 1.0)};
}

EigenSystem hermitian_eig(const Matrix& h, double tol) {
  if (h.rows() != h.cols()) throw std::invalid_argument("hermitian_eig: matrix is not square");
  const double scale = std::max(1.0, h.size() ? h.cwiseAbs().maxCoeff() : 0.0);
  const double herm = max_abs_diff(h, h.adjoint());
  if (herm > tol * scale) {
    std::ostringstream os;
    os << "hermitian_eig: input is not Hermitian (max |M - M^dag| = " << herm << ")";
    throw std::invalid_argument(os.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
  if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_eig: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

EigenSystem hermitian_eig(const Operator& h, double tol) { return hermitian_eig(h.m, tol); }

Matrix propagator(const EigenSystem& es, double t) {
  const Vector phases = (Complex(0, -1) * t * es.values.cast<Complex>()).array().exp().matrix();
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::set<std::size_t>& keep) {
  const auto traced = complement(rho.layout, keep);
  const std::vector<std::size_t> kept(keep.begin(), keep.end());
  const auto ok = offsets(rho.layout, kept);
  const auto ot = offsets(rho.layout, traced);
  const auto nk = static_cast<Eigen::Index>(ok.size());
  Matrix out = Matrix::Zero(nk, nk);
  for (Eigen::Index i = 0; i < nk; ++i)
    for (Eigen::Index j = 0; j < nk; ++j) {
      Complex s = 0.0;
      for (auto t : ot)
        s += rho.m(static_cast<Eigen::Index>(ok[i] + t), static_cast<Eigen::Index>(ok[j] + t));
      out(i, j) = s;
    }
  return {rho.layout.subset(kept), std::move(out)};
}

DensityMatrix partial_trace(const PureState& psi, const std::set<std::size_t>& keep) {
  const auto traced = complement(psi.layout, keep);
  const std::vector<std::size_t> kept(keep.begin(), keep.end());
  const auto ok = offsets(psi.layout, kept);
  const auto ot = offsets(psi.layout, traced);
  Matrix coeffs(static_cast<Eigen::Index>(ok.size()), static_cast<Eigen::Index>(ot.size()));
  for (std::size_t i = 0; i < ok.size(); ++i)
    for (std::size_t j = 0; j < ot.size(); ++j)
      coeffs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          psi.amp(static_cast<Eigen::Index>(ok[i] + ot[j]));
  return {psi.layout.subset(kept), coeffs * coeffs.adjoint()};
}

}  // namespace vibrow
