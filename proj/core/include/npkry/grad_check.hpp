#pragma once

#include <functional>
#include <vector>

namespace npkry {

/// A deterministic scalar function of a parameter vector, paired with its
/// reverse-mode gradient.
struct ScalarFn {
  std::function<double(const std::vector<double>&)> value;
  std::function<std::vector<double>(const std::vector<double>&)> gradient;
};

struct GradCheckReport {
  double max_rel_dev = 0.0;
  std::size_t worst_component = 0;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

/// Central-difference validation of the reverse-mode gradient at theta0.
/// Relative deviation per component uses denominator
/// max(1, |analytic|, |numeric|) so tolerances stay meaningful near zero.
GradCheckReport grad_check(const ScalarFn& f,
                           const std::vector<double>& theta0, double step);

}  // namespace npkry
