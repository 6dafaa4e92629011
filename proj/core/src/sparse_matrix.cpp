#include "npkry/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "npkry/error.hpp"

namespace npkry {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols,
                           std::vector<std::size_t> row_ptr,
                           std::vector<std::size_t> col_idx,
                           std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  check(rows_ > 0 && cols_ > 0, "SparseMatrix: dimensions must be positive");
  check(row_ptr_.size() == rows_ + 1, "SparseMatrix: row_ptr size mismatch");
  check(row_ptr_.front() == 0, "SparseMatrix: row_ptr[0] must be 0");
  check(row_ptr_.back() == values_.size(),
        "SparseMatrix: row_ptr[rows] must equal nnz");
  check(col_idx_.size() == values_.size(),
        "SparseMatrix: col_idx/values size mismatch");
  for (std::size_t i = 0; i < rows_; ++i)
    check(row_ptr_[i] <= row_ptr_[i + 1],
          "SparseMatrix: row_ptr must be nondecreasing");
  for (std::size_t k = 0; k < col_idx_.size(); ++k)
    check(col_idx_[k] < cols_, "SparseMatrix: column index out of range");
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  check(rows > 0 && cols > 0, "from_triplets: dimensions must be positive");
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) {
              if (std::get<0>(a) != std::get<0>(b))
                return std::get<0>(a) < std::get<0>(b);
              return std::get<1>(a) < std::get<1>(b);
            });
  std::vector<std::size_t> row_ptr(rows + 1, 0), col_idx;
  std::vector<double> values;
  col_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  std::size_t last_row = rows;  // sentinel: no entry emitted yet
  std::size_t last_col = cols;
  for (const auto& [r, c, v] : triplets) {
    check(r < rows && c < cols, "from_triplets: index out of range");
    if (r == last_row && c == last_col) {
      values.back() += v;  // duplicate entry
      continue;
    }
    col_idx.push_back(c);
    values.push_back(v);
    row_ptr[r + 1] = col_idx.size();
    last_row = r;
    last_col = c;
  }
  // carry counts forward across empty rows
  for (std::size_t i = 1; i <= rows; ++i)
    row_ptr[i] = std::max(row_ptr[i], row_ptr[i - 1]);
  return SparseMatrix(rows, cols, std::move(row_ptr), std::move(col_idx),
                      std::move(values));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::size_t> row_ptr(n + 1), col_idx(n);
  std::vector<double> values(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    row_ptr[i] = i;
    col_idx[i] = i;
  }
  row_ptr[n] = n;
  return SparseMatrix(n, n, std::move(row_ptr), std::move(col_idx),
                      std::move(values));
}

SparseMatrix SparseMatrix::diagonal_matrix(const DenseVector& d) {
  const std::size_t n = d.size();
  std::vector<std::size_t> row_ptr(n + 1), col_idx(n);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    row_ptr[i] = i;
    col_idx[i] = i;
    values[i] = d[i];
  }
  row_ptr[n] = n;
  return SparseMatrix(n, n, std::move(row_ptr), std::move(col_idx),
                      std::move(values));
}

double SparseMatrix::coeff(std::size_t i, std::size_t j) const {
  check(i < rows_ && j < cols_, "coeff: index out of range");
  const auto begin = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto end = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(begin, end, j);
  if (it != end && *it == j)
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
  return 0.0;
}

DenseVector SparseMatrix::diagonal() const {
  check(rows_ == cols_, "diagonal: matrix must be square");
  DenseVector d(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) d[i] = coeff(i, i);
  return d;
}

bool SparseMatrix::is_symmetric(double rel_tol) const {
  if (rows_ != cols_) return false;
  double scale = 0.0;
  for (double v : values_) scale = std::max(scale, std::abs(v));
  const double tol = rel_tol * std::max(1.0, scale);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      if (std::abs(values_[k] - coeff(col_idx_[k], i)) > tol) return false;
  return true;
}

double SparseMatrix::norm_inf() const {
  double best = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      s += std::abs(values_[k]);
    best = std::max(best, s);
  }
  return best;
}

void spmv_into(const SparseMatrix& A, std::span<const double> x,
               std::span<double> y) {
  check(A.cols() == x.size(), "spmv: dimension mismatch");
  check(A.rows() == y.size(), "spmv: output dimension mismatch");
  const auto row_ptr = A.row_ptr();
  const auto col_idx = A.col_idx();
  const auto values = A.values();
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      s += values[k] * x[col_idx[k]];
    y[i] = s;
  }
}

DenseVector spmv(const SparseMatrix& A, const DenseVector& x) {
  DenseVector y(A.rows(), 0.0);
  spmv_into(A, x.span(), y.span());
  return y;
}

void spmv_transpose_into(const SparseMatrix& A, std::span<const double> x,
                         std::span<double> y) {
  check(A.rows() == x.size(), "spmv_transpose: dimension mismatch");
  check(A.cols() == y.size(), "spmv_transpose: output dimension mismatch");
  std::fill(y.begin(), y.end(), 0.0);
  const auto row_ptr = A.row_ptr();
  const auto col_idx = A.col_idx();
  const auto values = A.values();
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      y[col_idx[k]] += values[k] * x[i];
}

DenseVector spmv_transpose(const SparseMatrix& A, const DenseVector& x) {
  DenseVector y(A.cols(), 0.0);
  spmv_transpose_into(A, x.span(), y.span());
  return y;
}

}  // namespace npkry
