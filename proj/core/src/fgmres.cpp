#include "npkry/fgmres.hpp"

#include <cmath>

#include "npkry/error.hpp"

namespace npkry {

FgmresResult fgmres(const SparseMatrix& A, const DenseVector& b,
                    const PrecondFn& precond, const FgmresOptions& opts) {
  check(A.rows() == A.cols(), "fgmres: matrix must be square");
  check(A.cols() == b.size(), "fgmres: dimension mismatch");
  check(opts.max_iter >= 1, "fgmres: max_iter must be positive");
  const double beta = norm2(b);
  check(beta > 0.0, "fgmres: zero right-hand side");

  const std::size_t n = b.size();
  const std::size_t mmax = opts.max_iter;

  FgmresResult out;
  KrylovTrace& tr = out.trace;
  tr.res_norms.push_back(beta);

  std::vector<DenseVector> V;
  std::vector<DenseVector> Z;
  V.push_back(scaled(b, 1.0 / beta));

  Hessenberg Hfull(mmax + 1, mmax);  // raw Arnoldi entries
  Hessenberg Rfull(mmax + 1, mmax);  // rotated copy for the LS solve
  std::vector<double> g(mmax + 1, 0.0);
  g[0] = beta;

  std::size_t m = 0;
  bool happy = false;
  for (std::size_t j = 0; j < mmax; ++j) {
    DenseVector z = precond(V[j]);
    check(z.size() == n, "fgmres: preconditioner changed dimension");
    check(all_finite(z), "fgmres: preconditioner produced non-finite values");
    Z.push_back(std::move(z));
    const DenseVector w = spmv(A, Z.back());

    const MgsResult mgs = mgs_orthogonalize(w, V);
    for (std::size_t i = 0; i <= j; ++i) {
      Hfull.at(i, j) = mgs.coeffs[i];
      Rfull.at(i, j) = mgs.coeffs[i];
    }
    Hfull.at(j + 1, j) = mgs.breakdown ? 0.0 : mgs.h_next;
    Rfull.at(j + 1, j) = Hfull.at(j + 1, j);

    // previous rotations, then the new one
    for (std::size_t i = 0; i < j; ++i) {
      double x = Rfull.at(i, j), y = Rfull.at(i + 1, j);
      givens_apply(tr.givens[i], x, y);
      Rfull.at(i, j) = x;
      Rfull.at(i + 1, j) = y;
    }
    const GivensResult giv =
        givens_compute(Rfull.at(j, j), Rfull.at(j + 1, j));
    check(!giv.breakdown,
          "fgmres: rank-deficient column, cannot advance (breakdown before "
          "convergence)");
    tr.givens.push_back(giv.pair);
    Rfull.at(j, j) = giv.r;
    Rfull.at(j + 1, j) = 0.0;
    givens_apply(giv.pair, g[j], g[j + 1]);

    tr.sines.push_back(std::abs(giv.pair.s));
    tr.res_norms.push_back(std::abs(g[j + 1]));
    m = j + 1;

    if (mgs.breakdown) {
      // exact solution lies in the current subspace
      tr.breakdown_at = j;
      V.push_back(DenseVector(n, 0.0));
      happy = true;
      break;
    }
    V.push_back(mgs.v_next);
    if (tr.res_norms.back() / beta <= opts.tol) break;
  }

  // back-substitution on the rotated system: R(0..m-1, 0..m-1) nu = g
  DenseVector nu(m, 0.0);
  for (std::size_t jj = m; jj-- > 0;) {
    double s = g[jj];
    for (std::size_t k = jj + 1; k < m; ++k) s -= Rfull.at(jj, k) * nu[k];
    const double d = Rfull.at(jj, jj);
    check(d != 0.0, "fgmres: singular triangular factor");
    nu[jj] = s / d;
  }
  out.x = DenseVector(n, 0.0);
  for (std::size_t k = 0; k < m; ++k) axpy(nu[k], Z[k], out.x);

  out.iters = m;
  const DenseVector resid = subtract(b, spmv(A, out.x));
  out.final_residual = norm2(resid);
  out.converged = happy || out.final_residual / beta <= opts.tol;
  const double recursive = tr.res_norms.back();
  out.residual_mismatch =
      std::abs(out.final_residual - recursive) > 1e-8 * beta;

  tr.H = Hessenberg(m + 1, m);
  for (std::size_t i = 0; i <= m; ++i)
    for (std::size_t jj = 0; jj < m; ++jj) tr.H.at(i, jj) = Hfull.at(i, jj);
  if (opts.keep_basis) {
    tr.V = std::move(V);
    tr.Z = std::move(Z);
  }
  return out;
}

FgmresResult fgmres(const ProblemInstance& inst, const Preconditioner& M,
                    const FgmresOptions& opts) {
  return fgmres(
      inst.A, inst.b,
      [&](const DenseVector& v) { return M.apply(v, inst); }, opts);
}

}  // namespace npkry
