#pragma once

#include <cstddef>
#include <vector>

#include "npkry/dense_vector.hpp"
#include "npkry/givens.hpp"

namespace npkry {

/// Dense (m+1) x m upper-Hessenberg matrix, row-major. Entries below the
/// first subdiagonal stay zero.
class Hessenberg {
 public:
  Hessenberg() = default;
  Hessenberg(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& at(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

/// Minimizer of || beta*e_1 - H nu || for upper-Hessenberg H ((m+1) x m),
/// via the Givens QR sweep and back-substitution on R. Throws on a
/// singular R (cannot happen before breakdown for SPD systems).
DenseVector dense_solve_ls(const Hessenberg& H, double beta);

/// Residual norm of the least-squares problem at the minimizer, i.e. the
/// magnitude of the rotated rhs tail.
double dense_solve_ls_residual(const Hessenberg& H, double beta);

struct MgsResult {
  std::vector<double> coeffs;  // projections onto the basis, MGS order
  double h_next = 0.0;         // norm of the orthogonal remainder
  DenseVector v_next;          // unit remainder; unspecified on breakdown
  bool breakdown = false;
};

/// Modified Gram-Schmidt of w against an orthonormal basis, with one
/// reorthogonalization pass when the remainder lost more than half the
/// input norm (selective reorthogonalization).
MgsResult mgs_orthogonalize(const DenseVector& w,
                            const std::vector<DenseVector>& basis);

}  // namespace npkry
