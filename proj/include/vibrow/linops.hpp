#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace vibrow {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-8;
inline constexpr double kPositivityFloor = -1e-8;

// Ordered subsystem dimensions of a tensor-product space.
class SpaceLayout {
 public:
  SpaceLayout() = default;
  explicit SpaceLayout(std::vector<std::size_t> dims);
  SpaceLayout(std::initializer_list<std::size_t> dims)
      : SpaceLayout(std::vector<std::size_t>(dims)) {}

  // Qubit A, qubit B, qubit C, mode 1, mode 2.
  static SpaceLayout full_model(int n_max);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t factors() const { return dims_.size(); }
  std::size_t dim(std::size_t factor) const { return dims_.at(factor); }
  std::size_t total() const { return total_; }

  SpaceLayout concat(const SpaceLayout& other) const;
  SpaceLayout subset(const std::vector<std::size_t>& keep) const;

  bool operator==(const SpaceLayout& other) const { return dims_ == other.dims_; }

 private:
  std::vector<std::size_t> dims_;
  std::size_t total_ = 1;
};

struct Operator {
  SpaceLayout layout;
  Matrix m;

  Operator() = default;
  Operator(SpaceLayout layout_, Matrix m_);

  static Operator identity(const SpaceLayout& layout);
  static Operator zero(const SpaceLayout& layout);

  std::size_t dim() const { return layout.total(); }
  Operator adjoint() const { return {layout, m.adjoint()}; }
  double hermiticity_error() const;
  bool is_hermitian(double tol = kHermitianTol) const { return hermiticity_error() <= tol; }

  Operator operator+(const Operator& rhs) const;
  Operator operator-(const Operator& rhs) const;
  Operator operator*(const Operator& rhs) const;
  Operator& operator+=(const Operator& rhs);
  friend Operator operator*(Complex s, const Operator& op) { return {op.layout, s * op.m}; }
  friend Operator operator*(double s, const Operator& op) { return {op.layout, s * op.m}; }
};

// Largest elementwise modulus of a - b.
double max_abs_diff(const Matrix& a, const Matrix& b);

struct PureState {
  SpaceLayout layout;
  Vector amp;

  PureState() = default;
  PureState(SpaceLayout layout_, Vector amp_);

  // Product basis state; digits are given per factor in layout order.
  static PureState basis(const SpaceLayout& layout, const std::vector<std::size_t>& digits);

  double norm() const { return amp.norm(); }
  void validate(double tol = 1e-10) const;
};

struct DensityMatrix {
  SpaceLayout layout;
  Matrix m;

  DensityMatrix() = default;
  DensityMatrix(SpaceLayout layout_, Matrix m_);

  static DensityMatrix from_pure(const PureState& psi);

  Complex trace() const { return m.trace(); }
  double purity() const;
  double min_eigenvalue() const;
  // Throws std::invalid_argument if Hermiticity, trace or positivity is off.
  void validate(double herm_tol = kHermitianTol, double trace_tol = kTraceTol,
                double floor = kPositivityFloor) const;
};

namespace ops {
Operator identity(std::size_t dim);
Operator sigma_x();
Operator sigma_y();
Operator sigma_z();
Operator sigma_plus();   // |0><1|
Operator sigma_minus();  // |1><0|
Operator projector(std::size_t level, std::size_t dim = 2);
}  // namespace ops

Operator kron(std::span<const Operator> factors);
Operator kron(std::initializer_list<Operator> factors);

// a1 A(x)I(x)I + a2 I(x)A(x)I + a3 I(x)I(x)A for a 2x2 site operator.
Operator kron_sum(const Operator& site_op, const std::array<double, 3>& coeffs);

struct Ladder {
  Operator b;
  Operator b_dag;
};

Ladder boson_ladder(int n_max);

// exp(lambda (B^dag - B)) on the (n_max+1)-dimensional truncation.
Operator displacement(double lambda, int n_max);

struct EigenSystem {
  RealVector values;  // ascending
  Matrix vectors;     // columns are eigenvectors
};

EigenSystem hermitian_eig(const Operator& h, double tol = kHermitianTol);
EigenSystem hermitian_eig(const Matrix& h, double tol = kHermitianTol);

// V diag(exp(-i values t)) V^dag
Matrix propagator(const EigenSystem& es, double t);

DensityMatrix partial_trace(const DensityMatrix& rho, const std::set<std::size_t>& keep);
DensityMatrix partial_trace(const PureState& psi, const std::set<std::size_t>& keep);

}  // namespace vibrow
