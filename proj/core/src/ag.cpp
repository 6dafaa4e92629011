#include "npkry/ag.hpp"

#include <cmath>

#include "npkry/error.hpp"
#include "npkry/givens.hpp"

namespace npkry {

AgResult ag_m(ad::Tape& tape, const SparseMatrix& A, const DenseVector& r0,
              const AdPrecondFn& precond, std::size_t M) {
  check(M >= 1, "ag_m: M must be at least 1");
  check(A.rows() == A.cols() && A.cols() == r0.size(),
        "ag_m: dimension mismatch");
  const double beta = norm2(r0);
  check(beta > 0.0, "ag_m: zero initial residual");

  AgResult out;
  out.sines.reserve(M);
  bool stalled = false;  // basis direction collapsed before convergence

  std::vector<ad::Var> basis;
  basis.push_back(tape.constant(scaled(r0, 1.0 / beta).raw(), {r0.size()}));

  // rotated Hessenberg column heads carried as tape scalars
  std::vector<ad::Var> rot_c, rot_s;

  for (std::size_t j = 0; j < M; ++j) {
    ad::Var z = precond(tape, basis[j]);
    check(ad::numel(z.shape()) == r0.size(),
          "ag_m: preconditioner changed dimension");
    for (double v : z.value())
      check(std::isfinite(v), "ag_m: preconditioner produced non-finite output");
    ad::Var w = tape.matvec(A, z);
    double w_norm_in = 0.0;
    for (double v : w.value()) w_norm_in += v * v;
    w_norm_in = std::sqrt(w_norm_in);

    // modified Gram-Schmidt, gradients flow through the coefficients
    std::vector<ad::Var> column;
    column.reserve(j + 2);
    for (std::size_t i = 0; i <= j; ++i) {
      ad::Var h = tape.dot(w, basis[i]);
      w = tape.axpy(tape.scale(h, -1.0), basis[i], w);
      column.push_back(h);
    }
    // selective reorthogonalization, mirroring the plain solver
    {
      double rem = 0.0;
      for (double v : w.value()) rem += v * v;
      rem = std::sqrt(rem);
      if (rem < 0.5 * w_norm_in) {
        for (std::size_t i = 0; i <= j; ++i) {
          ad::Var h2 = tape.dot(w, basis[i]);
          w = tape.axpy(tape.scale(h2, -1.0), basis[i], w);
          column[i] = tape.add(column[i], h2);
        }
      }
    }
    ad::Var h_next = tape.norm2(w);
    if (h_next.value0() < kBreakdownRel * std::max(1.0, w_norm_in)) {
      // distinguish exact convergence from a collapsed direction: rotate
      // the column head (values only) and look at its magnitude
      std::vector<double> col_vals;
      col_vals.reserve(j + 1);
      double col_scale = 1.0;
      for (const auto& h : column) {
        col_vals.push_back(h.value0());
        col_scale = std::max(col_scale, std::abs(h.value0()));
      }
      for (std::size_t i = 0; i < j; ++i) {
        const GivensPair rp{rot_c[i].value0(), rot_s[i].value0()};
        givens_apply(rp, col_vals[i], col_vals[i + 1]);
      }
      out.breakdown_at = j;
      stalled = std::abs(col_vals[j]) < kBreakdownRel * col_scale;
      break;
    }
    basis.push_back(tape.divide(w, h_next));
    column.push_back(h_next);

    // previous rotations on the new column
    for (std::size_t i = 0; i < j; ++i) {
      ad::Var x = column[i];
      ad::Var y = column[i + 1];
      column[i] = tape.add(tape.hadamard(rot_c[i], x), tape.hadamard(rot_s[i], y));
      column[i + 1] =
          tape.sub(tape.hadamard(rot_c[i], y), tape.hadamard(rot_s[i], x));
    }
    const ad::GivensVars gv = tape.givens(column[j], column[j + 1]);
    if (gv.breakdown) {
      out.breakdown_at = j;
      stalled = true;
      break;
    }
    rot_c.push_back(gv.c);
    rot_s.push_back(gv.s);
    out.sines.push_back(tape.abs_op(gv.s));
  }

  // constant padding past a breakdown, no gradient: exact convergence
  // keeps the remaining sines at zero; a collapsed direction cannot
  // reduce the residual again, so those sines are one
  const double pad = stalled ? 1.0 : 0.0;
  while (out.sines.size() < M)
    out.sines.push_back(tape.constant_scalar(pad));
  return out;
}

}  // namespace npkry
