#pragma once

#include <cmath>
#include <random>

#include "vibrow/linops.hpp"

namespace testing {

using namespace vibrow;

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> nd;
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(nd(rng), nd(rng));
  return m;
}

inline Matrix random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
  const Matrix a = random_matrix(rng, n);
  return 0.5 * (a + a.adjoint());
}

inline PureState random_state(std::mt19937_64& rng, const SpaceLayout& layout) {
  std::normal_distribution<double> nd;
  Vector v(static_cast<Eigen::Index>(layout.total()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(nd(rng), nd(rng));
  return {layout, v / v.norm()};
}

inline DensityMatrix random_density(std::mt19937_64& rng, const SpaceLayout& layout) {
  const Matrix a = random_matrix(rng, static_cast<Eigen::Index>(layout.total()));
  Matrix r = a * a.adjoint();
  r /= r.trace();
  return {layout, r};
}

inline Matrix random_unitary(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, n));
  return qr.householderQ() * Matrix::Identity(n, n);
}

}  // namespace testing
