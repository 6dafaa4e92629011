#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "npkry/dense_vector.hpp"
#include "npkry/hessenberg.hpp"
#include "npkry/preconditioner.hpp"
#include "npkry/sparse_matrix.hpp"

namespace npkry {

/// Record of a flexible Arnoldi-Givens run. With m completed iterations:
/// V holds v_0..v_m, Z holds z_0..z_{m-1}, H is (m+1) x m, and the
/// flexible Arnoldi relation A Z = V H holds. res_norms are the
/// recursively tracked values ||r_0||..||r_m|| with
/// res_norms[j] = |s_j| * res_norms[j-1]. On happy breakdown the final
/// basis column is a zero vector (the relation still holds since the
/// matching Hessenberg entry is zero).
struct KrylovTrace {
  std::vector<DenseVector> V;
  std::vector<DenseVector> Z;
  Hessenberg H;
  std::vector<GivensPair> givens;
  std::vector<double> sines;
  std::vector<double> res_norms;
  std::optional<std::size_t> breakdown_at;  // iteration index, 0-based
};

struct FgmresOptions {
  double tol = 1e-6;          // relative residual target
  std::size_t max_iter = 400;
  bool keep_basis = true;     // store V and Z in the trace
};

struct FgmresResult {
  DenseVector x;
  KrylovTrace trace;
  std::size_t iters = 0;
  bool converged = false;
  /// Recursive and explicit final residuals disagreed by more than 1e-8
  /// relative: numerical-health warning, not an error.
  bool residual_mismatch = false;
  double final_residual = 0.0;  // explicit ||b - A x||
};

using PrecondFn = std::function<DenseVector(const DenseVector&)>;

/// Flexible GMRES with right preconditioning, x_0 = 0, no restarts.
/// Residuals are tracked via the Givens recurrence and cross-checked
/// explicitly at exit. Stagnation at max_iter returns the best iterate
/// with converged = false.
FgmresResult fgmres(const SparseMatrix& A, const DenseVector& b,
                    const PrecondFn& precond, const FgmresOptions& opts = {});

FgmresResult fgmres(const ProblemInstance& inst, const Preconditioner& M,
                    const FgmresOptions& opts = {});

}  // namespace npkry
