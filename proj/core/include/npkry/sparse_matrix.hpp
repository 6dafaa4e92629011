#pragma once

#include <cstddef>
#include <span>
#include <tuple>
#include <vector>

#include "npkry/dense_vector.hpp"

namespace npkry {

/// Compressed-row sparse matrix. Immutable after construction.
class SparseMatrix {
 public:
  using Triplet = std::tuple<std::size_t, std::size_t, double>;

  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols,
               std::vector<std::size_t> row_ptr,
               std::vector<std::size_t> col_idx, std::vector<double> values);

  /// Builds from (row, col, value) triplets; duplicates are summed,
  /// columns sorted within each row.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix identity(std::size_t n);
  /// Diagonal matrix from entries d.
  static SparseMatrix diagonal_matrix(const DenseVector& d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  /// Entry (i, j); zero when not stored. Binary search within the row.
  double coeff(std::size_t i, std::size_t j) const;

  DenseVector diagonal() const;
  bool is_symmetric(double rel_tol = 1e-12) const;

  /// Largest row sum of absolute values (infinity norm).
  double norm_inf() const;

  bool operator==(const SparseMatrix& o) const = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

/// y = A x, exact IEEE double accumulation row by row.
DenseVector spmv(const SparseMatrix& A, const DenseVector& x);
void spmv_into(const SparseMatrix& A, std::span<const double> x,
               std::span<double> y);

/// y = A^T x (used by reverse-mode adjoints of matvec).
DenseVector spmv_transpose(const SparseMatrix& A, const DenseVector& x);
void spmv_transpose_into(const SparseMatrix& A, std::span<const double> x,
                         std::span<double> y);

}  // namespace npkry
