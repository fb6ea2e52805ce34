#pragma once

#include <cmath>

#include <gtest/gtest.h>

#include "chandis/qcore.hpp"

namespace chandis::test {

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline ComplexMatrix random_hermitian(std::size_t dim, Rng& rng) {
  ComplexMatrix g(dim, dim);
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = complex_normal(rng);
  return (g + g.adjoint()) / 2.0;
}

inline ComplexMatrix ket_plus() {
  ComplexMatrix m(2, 2);
  m << 0.5, 0.5, 0.5, 0.5;
  return m;
}

}  // namespace chandis::test
