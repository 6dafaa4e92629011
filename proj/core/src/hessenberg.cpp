#include "npkry/hessenberg.hpp"

#include <cmath>

#include "npkry/error.hpp"

namespace npkry {

namespace {

// Givens QR of H: returns (R in place of a copy, rotated rhs g).
struct QrSweep {
  Hessenberg R;
  std::vector<double> g;
};

QrSweep qr_sweep(const Hessenberg& H, double beta) {
  const std::size_t m = H.cols();
  check(H.rows() == m + 1, "dense_solve_ls: H must be (m+1) x m");
  QrSweep out{H, std::vector<double>(m + 1, 0.0)};
  out.g[0] = beta;
  std::vector<GivensPair> rot(m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      double x = out.R.at(i, j), y = out.R.at(i + 1, j);
      givens_apply(rot[i], x, y);
      out.R.at(i, j) = x;
      out.R.at(i + 1, j) = y;
    }
    const GivensResult g = givens_compute(out.R.at(j, j), out.R.at(j + 1, j));
    rot[j] = g.pair;
    out.R.at(j, j) = g.breakdown ? 0.0 : g.r;
    out.R.at(j + 1, j) = 0.0;
    double x = out.g[j], y = out.g[j + 1];
    givens_apply(rot[j], x, y);
    out.g[j] = x;
    out.g[j + 1] = y;
  }
  return out;
}

}  // namespace

DenseVector dense_solve_ls(const Hessenberg& H, double beta) {
  const std::size_t m = H.cols();
  check(m > 0, "dense_solve_ls: empty system");
  QrSweep qr = qr_sweep(H, beta);
  DenseVector nu(m, 0.0);
  for (std::size_t jj = m; jj-- > 0;) {
    double s = qr.g[jj];
    for (std::size_t k = jj + 1; k < m; ++k) s -= qr.R.at(jj, k) * nu[k];
    const double d = qr.R.at(jj, jj);
    check(d != 0.0, "dense_solve_ls: singular R");
    nu[jj] = s / d;
  }
  return nu;
}

double dense_solve_ls_residual(const Hessenberg& H, double beta) {
  QrSweep qr = qr_sweep(H, beta);
  return std::abs(qr.g[H.cols()]);
}

MgsResult mgs_orthogonalize(const DenseVector& w,
                            const std::vector<DenseVector>& basis) {
  MgsResult out;
  out.coeffs.assign(basis.size(), 0.0);
  DenseVector r = w;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double h = dot(r, basis[i]);
    axpy(-h, basis[i], r);
    out.coeffs[i] = h;
  }
  const double w_norm = norm2(w);
  double r_norm = norm2(r);
  if (!basis.empty() && r_norm < 0.5 * w_norm) {
    // second pass recovers orthogonality lost to cancellation
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const double h = dot(r, basis[i]);
      axpy(-h, basis[i], r);
      out.coeffs[i] += h;
    }
    r_norm = norm2(r);
  }
  out.h_next = r_norm;
  if (r_norm < kBreakdownRel * std::max(1.0, w_norm)) {
    out.breakdown = true;
    out.v_next = DenseVector(w.size(), 0.0);
    return out;
  }
  scal(1.0 / r_norm, r);
  out.v_next = std::move(r);
  return out;
}

}  // namespace npkry
