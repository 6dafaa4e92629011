#pragma once

#include <cmath>
#include <vector>

#include "npkry/dense_vector.hpp"
#include "npkry/rng.hpp"
#include "npkry/sparse_matrix.hpp"

namespace npkry::test {

inline DenseVector random_vector(std::size_t n, Rng& rng, double lo = -1.0,
                                 double hi = 1.0) {
  DenseVector v(n, 0.0);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

/// Dense random SPD matrix B^T B + delta I, stored as CSR.
inline SparseMatrix random_spd(std::size_t n, Rng& rng, double delta = 0.5) {
  std::vector<double> B(n * n);
  for (auto& x : B) x = rng.uniform(-1.0, 1.0);
  std::vector<SparseMatrix::Triplet> trip;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = i == j ? delta : 0.0;
      for (std::size_t k = 0; k < n; ++k) s += B[k * n + i] * B[k * n + j];
      trip.emplace_back(i, j, s);
    }
  return SparseMatrix::from_triplets(n, n, std::move(trip));
}

/// Gaussian elimination with partial pivoting; dense row-major a (n x n).
inline std::vector<double> dense_solve(std::vector<double> a,
                                       std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c)
        std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(rhs[col], rhs[piv]);
    }
    const double d = a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / d;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = rhs[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= a[r * n + c] * x[c];
    x[r] = s / a[r * n + r];
  }
  return x;
}

/// Dense solve of A x = b for a CSR matrix (test oracle only).
inline DenseVector dense_solve(const SparseMatrix& A, const DenseVector& b) {
  const std::size_t n = A.rows();
  std::vector<double> dense(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k)
      dense[i * n + A.col_idx()[k]] = A.values()[k];
  return DenseVector(dense_solve(std::move(dense),
                                 std::vector<double>(b.begin(), b.end())));
}

}  // namespace npkry::test
