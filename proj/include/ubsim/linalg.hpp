#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ubsim/common.hpp"

// Small dense kernels for the d x d coefficient matrices (d is the SDE
// dimension, typically 1). Matrices are row-major, flattened.

namespace ubsim::linalg {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// y = A x
inline void mat_vec(std::span<const double> a, std::span<const double> x,
                    std::span<double> y, int d) {
  for (int r = 0; r < d; ++r) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) s += a[std::size_t(r) * d + c] * x[std::size_t(c)];
    y[std::size_t(r)] = s;
  }
}

// C = A A^T (the diffusion matrix a = sigma sigma^T)
inline void aat(std::span<const double> a, std::span<double> c, int d) {
  for (int r = 0; r < d; ++r)
    for (int s = 0; s < d; ++s) {
      double acc = 0.0;
      for (int k = 0; k < d; ++k)
        acc += a[std::size_t(r) * d + k] * a[std::size_t(s) * d + k];
      c[std::size_t(r) * d + s] = acc;
    }
}

// Solve A x = b in place via Gauss-Jordan with partial pivoting.
// `lu` is scratch of size d*d; b is overwritten with the solution.
// Throws NumericalError on a (numerically) singular matrix.
inline void solve_inplace(std::span<const double> a, std::span<double> b,
                          std::span<double> lu, int d) {
  for (int i = 0; i < d * d; ++i) lu[std::size_t(i)] = a[std::size_t(i)];
  for (int col = 0; col < d; ++col) {
    int piv = col;
    double best = std::fabs(lu[std::size_t(col) * d + col]);
    for (int r = col + 1; r < d; ++r) {
      const double v = std::fabs(lu[std::size_t(r) * d + col]);
      if (v > best) { best = v; piv = r; }
    }
    if (!(best > 0.0))
      throw NumericalError("singular matrix in linear solve");
    if (piv != col) {
      for (int c = 0; c < d; ++c)
        std::swap(lu[std::size_t(piv) * d + c], lu[std::size_t(col) * d + c]);
      std::swap(b[std::size_t(piv)], b[std::size_t(col)]);
    }
    const double inv = 1.0 / lu[std::size_t(col) * d + col];
    for (int r = 0; r < d; ++r) {
      if (r == col) continue;
      const double f = lu[std::size_t(r) * d + col] * inv;
      if (f == 0.0) continue;
      for (int c = col; c < d; ++c)
        lu[std::size_t(r) * d + c] -= f * lu[std::size_t(col) * d + c];
      b[std::size_t(r)] -= f * b[std::size_t(col)];
    }
  }
  for (int r = 0; r < d; ++r) b[std::size_t(r)] /= lu[std::size_t(r) * d + r];
}

// Solve A^T x = b (needed for the Malliavin vector, which applies the
// inverse transpose of the frozen volatility).
inline void solve_transposed_inplace(std::span<const double> a, std::span<double> b,
                                     std::span<double> at, std::span<double> lu, int d) {
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      at[std::size_t(c) * d + r] = a[std::size_t(r) * d + c];
  solve_inplace(std::span<const double>(at.data(), at.size()), b, lu, d);
}

// B = A^{-1}, via d solves against unit vectors.
inline void inverse(std::span<const double> a, std::span<double> b,
                    std::span<double> col, std::span<double> lu, int d) {
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) col[std::size_t(i)] = (i == j) ? 1.0 : 0.0;
    solve_inplace(a, col, lu, d);
    for (int i = 0; i < d; ++i) b[std::size_t(i) * d + j] = col[std::size_t(i)];
  }
}

// Tr(A B) for square A, B.
inline double trace_product(std::span<const double> a, std::span<const double> b, int d) {
  double s = 0.0;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      s += a[std::size_t(r) * d + c] * b[std::size_t(c) * d + r];
  return s;
}

}  // namespace ubsim::linalg
