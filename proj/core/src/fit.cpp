#include "npkry/fit.hpp"

#include <cmath>

#include "npkry/error.hpp"

namespace npkry {

namespace {

FitResult least_squares_line(std::span<const std::pair<double, double>> pts,
                             FitResult::Kind kind) {
  check(pts.size() >= 2, "fit: need at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  const double det = n * sxx - sx * sx;
  check(std::abs(det) > 1e-12 * std::max(1.0, n * sxx),
        "fit: degenerate abscissae");
  FitResult r;
  r.kind = kind;
  r.a = (n * sxy - sx * sy) / det;
  r.b = (sy * sxx - sx * sxy) / det;
  r.n_points = pts.size();
  for (const auto& [x, y] : pts) {
    const double e = y - (r.a * x + r.b);
    r.rss += e * e;
  }
  return r;
}

}  // namespace

FitResult fit_linear(std::span<const std::pair<double, double>> points) {
  return least_squares_line(points, FitResult::Kind::kLinear);
}

FitResult fit_exponential(std::span<const std::pair<double, double>> points) {
  std::vector<std::pair<double, double>> logged;
  logged.reserve(points.size());
  for (const auto& [x, y] : points) {
    check(y > 0.0, "fit_exponential: nonpositive ordinate");
    logged.emplace_back(x, std::log(y));
  }
  return least_squares_line(logged, FitResult::Kind::kExponential);
}

SineProductEstimate sine_product_estimate(std::span<const double> mean_sines,
                                          std::size_t M) {
  check(mean_sines.size() == M, "sine_product_estimate: M mismatch");
  check(M >= 1, "sine_product_estimate: M must be positive");
  double mean = 0.0, product = 1.0;
  for (double s : mean_sines) {
    mean += s;
    product *= s;
  }
  mean /= static_cast<double>(M);
  SineProductEstimate out;
  out.estimate = std::pow(mean, static_cast<double>(M));
  out.product = product;
  return out;
}

}  // namespace npkry
