#include "npkry/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "npkry/error.hpp"

namespace npkry {

GradCheckReport grad_check(const ScalarFn& f,
                           const std::vector<double>& theta0, double step) {
  check(step > 0.0, "grad_check: step must be positive");
  GradCheckReport report;
  report.analytic = f.gradient(theta0);
  check(report.analytic.size() == theta0.size(),
        "grad_check: gradient size mismatch");
  report.numeric.resize(theta0.size());
  std::vector<double> theta = theta0;
  for (std::size_t i = 0; i < theta0.size(); ++i) {
    theta[i] = theta0[i] + step;
    const double fp = f.value(theta);
    theta[i] = theta0[i] - step;
    const double fm = f.value(theta);
    theta[i] = theta0[i];
    report.numeric[i] = (fp - fm) / (2.0 * step);
    const double denom = std::max(
        {1.0, std::abs(report.analytic[i]), std::abs(report.numeric[i])});
    const double dev = std::abs(report.analytic[i] - report.numeric[i]) / denom;
    if (dev > report.max_rel_dev) {
      report.max_rel_dev = dev;
      report.worst_component = i;
    }
  }
  return report;
}

}  // namespace npkry
