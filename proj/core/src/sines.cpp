#include "npkry/sines.hpp"

#include <cmath>

#include "npkry/error.hpp"

namespace npkry {

std::vector<double> extract_sines(const Hessenberg& H, SineMethod method) {
  const std::size_t m = H.cols();
  check(H.rows() == m + 1, "extract_sines: H must be (m+1) x m");
  std::vector<double> sines(m, 0.0);
  Hessenberg R = H;
  std::vector<GivensPair> rot(m);
  // first column of the accumulated Q_j, grown one entry per rotation
  std::vector<double> q{1.0};
  bool converged = false;
  for (std::size_t j = 0; j < m; ++j) {
    if (converged) break;  // remaining sines stay 0
    for (std::size_t i = 0; i < j; ++i) {
      double x = R.at(i, j), y = R.at(i + 1, j);
      givens_apply(rot[i], x, y);
      R.at(i, j) = x;
      R.at(i + 1, j) = y;
    }
    const GivensResult g = givens_compute(R.at(j, j), R.at(j + 1, j));
    if (g.breakdown) {
      converged = true;
      break;
    }
    rot[j] = g.pair;
    R.at(j, j) = g.r;
    R.at(j + 1, j) = 0.0;
    const double denom = q[j];
    q.push_back(0.0);
    givens_apply(g.pair, q[j], q[j + 1]);
    switch (method) {
      case SineMethod::kRotationComponent:
        sines[j] = std::abs(g.pair.s);
        break;
      case SineMethod::kGivensRatio:
        if (denom == 0.0) {
          converged = true;  // preceding exact convergence
          sines[j] = 0.0;
        } else {
          sines[j] = std::abs(q[j + 1] / denom);
        }
        break;
    }
  }
  return sines;
}

double principal_angle_sine(const DenseVector& x,
                            const std::vector<DenseVector>& y_basis) {
  const double xnorm = norm2(x);
  check(xnorm > 0.0, "principal_angle_sine: x must be nonzero");
  if (y_basis.empty()) return 1.0;
  // orthonormalize the basis; MGS with one reorthogonalization pass
  std::vector<DenseVector> q;
  q.reserve(y_basis.size());
  for (const auto& y : y_basis) {
    check(y.size() == x.size(), "principal_angle_sine: dimension mismatch");
    DenseVector r = y;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qi : q) axpy(-dot(r, qi), qi, r);
    const double rn = norm2(r);
    if (rn > 1e-12 * std::max(1.0, norm2(y))) {
      scal(1.0 / rn, r);
      q.push_back(std::move(r));
    }
  }
  DenseVector p = x;
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& qi : q) axpy(-dot(p, qi), qi, p);
  return norm2(p) / xnorm;
}

}  // namespace npkry
