#include "npkry/preconditioner.hpp"

#include "npkry/error.hpp"

namespace npkry {

DenseVector DiagonalPreconditioner::apply(const DenseVector& v,
                                          const ProblemInstance&) const {
  check(v.size() == diag_.size(), "DiagonalPreconditioner: size mismatch");
  DenseVector z(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) z[i] = diag_[i] * v[i];
  return z;
}

ad::Var DiagonalPreconditioner::apply_ad(ad::Tape& tape, ad::Var v,
                                         const ProblemInstance&) const {
  check(ad::numel(v.shape()) == diag_.size(),
        "DiagonalPreconditioner: size mismatch");
  const ad::Var d = tape.constant(diag_.raw(), {diag_.size()});
  return tape.hadamard(d, v);
}

}  // namespace npkry
