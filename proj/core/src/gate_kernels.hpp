#pragma once

// Local gate kernels on dense 2^n x 2^n matrices. Qubit 0 is the most
// significant bit of the basis index.

#include <cstddef>

#include "chandis/qcore.hpp"

namespace chandis::detail {

struct Local2 {
  cplx m00, m01, m10, m11;
};

inline Eigen::Index stride_of(std::size_t qubit, std::size_t n_qubits) {
  return Eigen::Index{1} << (n_qubits - 1 - qubit);
}

/// Pairs (i, i + s) with target bit 0, optionally restricted to control bit 1.
template <typename F>
inline void for_each_pair(Eigen::Index dim, Eigen::Index s, Eigen::Index control_mask, F&& f) {
  for (Eigen::Index base = 0; base < dim; base += 2 * s) {
    for (Eigen::Index off = 0; off < s; ++off) {
      const Eigen::Index i = base + off;
      if (control_mask != 0 && (i & control_mask) == 0) continue;
      f(i, i + s);
    }
  }
}

/// m <- G m
inline void apply_left(ComplexMatrix& m, const Local2& g, Eigen::Index s, Eigen::Index cmask) {
  const Eigen::Index dim = m.rows();
  for (Eigen::Index col = 0; col < m.cols(); ++col) {
    cplx* c = m.col(col).data();
    for_each_pair(dim, s, cmask, [&](Eigen::Index i, Eigen::Index j) {
      const cplx x = c[i];
      const cplx y = c[j];
      c[i] = g.m00 * x + g.m01 * y;
      c[j] = g.m10 * x + g.m11 * y;
    });
  }
}

/// m <- m G^dagger
inline void apply_right_adjoint(ComplexMatrix& m, const Local2& g, Eigen::Index s, Eigen::Index cmask) {
  const Eigen::Index rows = m.rows();
  const cplx a = std::conj(g.m00), b = std::conj(g.m01), c = std::conj(g.m10), d = std::conj(g.m11);
  for_each_pair(m.cols(), s, cmask, [&](Eigen::Index i, Eigen::Index j) {
    cplx* ci = m.col(i).data();
    cplx* cj = m.col(j).data();
    for (Eigen::Index r = 0; r < rows; ++r) {
      const cplx x = ci[r];
      const cplx y = cj[r];
      ci[r] = x * a + y * b;
      cj[r] = x * c + y * d;
    }
  });
}

inline void swap_rows(ComplexMatrix& m, Eigen::Index s, Eigen::Index cmask) {
  const Eigen::Index dim = m.rows();
  for (Eigen::Index col = 0; col < m.cols(); ++col) {
    cplx* c = m.col(col).data();
    for_each_pair(dim, s, cmask, [&](Eigen::Index i, Eigen::Index j) { std::swap(c[i], c[j]); });
  }
}

inline void swap_cols(ComplexMatrix& m, Eigen::Index s, Eigen::Index cmask) {
  for_each_pair(m.cols(), s, cmask, [&](Eigen::Index i, Eigen::Index j) { m.col(i).swap(m.col(j)); });
}

/// Tr(H a) for H acting locally as h on the target (and as zero on control-0 rows).
inline cplx local_trace(const ComplexMatrix& a, const Local2& h, Eigen::Index s, Eigen::Index cmask) {
  cplx acc = 0.0;
  for_each_pair(a.rows(), s, cmask, [&](Eigen::Index i, Eigen::Index j) {
    acc += h.m00 * a(i, i) + h.m01 * a(j, i) + h.m10 * a(i, j) + h.m11 * a(j, j);
  });
  return acc;
}

}  // namespace chandis::detail
