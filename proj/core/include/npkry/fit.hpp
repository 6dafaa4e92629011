#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace npkry {

/// Least-squares fit: linear y = a*j + b, or exponential
/// y = e^b * e^(a*j) (linear fit on log y; a is alpha, b is beta).
struct FitResult {
  enum class Kind { kLinear, kExponential };
  Kind kind = Kind::kLinear;
  double a = 0.0;
  double b = 0.0;
  double rss = 0.0;  // residual sum of squares in the fitted space
  std::size_t n_points = 0;
};

FitResult fit_linear(std::span<const std::pair<double, double>> points);
FitResult fit_exponential(std::span<const std::pair<double, double>> points);

struct SineProductEstimate {
  double estimate = 0.0;  // (mean of sines)^M
  double product = 0.0;   // exact product, for comparison
};

/// Product-of-sines estimate of the M-step contraction:
/// ((1/M) sum <|s_j|>)^M, together with the exact product.
/// AM-GM guarantees product <= estimate for nonnegative sines.
SineProductEstimate sine_product_estimate(std::span<const double> mean_sines,
                                          std::size_t M);

}  // namespace npkry
