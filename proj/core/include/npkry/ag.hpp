#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "npkry/dense_vector.hpp"
#include "npkry/sparse_matrix.hpp"
#include "npkry/tape.hpp"

namespace npkry {

/// Differentiable preconditioner application bound to a tape.
using AdPrecondFn = std::function<ad::Var(ad::Tape&, ad::Var)>;

struct AgResult {
  std::vector<ad::Var> sines;  // |s_1|..|s_M| as tape variables
  std::optional<std::size_t> breakdown_at;
};

/// M steps of the flexible Arnoldi process with Givens rotations,
/// recorded on the tape: z_j = precond(v_j), orthogonalization
/// coefficients, basis normalizations and rotations are all
/// differentiated. After a happy breakdown the remaining sines are
/// constant zeros with no gradient.
AgResult ag_m(ad::Tape& tape, const SparseMatrix& A, const DenseVector& r0,
              const AdPrecondFn& precond, std::size_t M);

}  // namespace npkry
