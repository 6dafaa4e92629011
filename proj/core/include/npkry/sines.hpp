#pragma once

#include <vector>

#include "npkry/dense_vector.hpp"
#include "npkry/hessenberg.hpp"

namespace npkry {

enum class SineMethod {
  kGivensRatio,         // first-column ratio of the accumulated Q_j
  kRotationComponent,   // |s| of the j-th rotation after the prior sweep
};

/// Sine magnitudes |s_1|..|s_m| hidden in an upper-Hessenberg matrix.
/// Both methods agree to rounding; once a zero denominator (exact
/// convergence) occurs, the remaining sines are 0.
std::vector<double> extract_sines(const Hessenberg& H, SineMethod method);

/// sin of the principal angle between x and span(y_basis):
/// ||x - P x|| / ||x|| with P the orthogonal projector. The basis is
/// orthonormalized internally; an empty basis gives 1.
double principal_angle_sine(const DenseVector& x,
                            const std::vector<DenseVector>& y_basis);

}  // namespace npkry
