#pragma once

#include <algorithm>
#include <cmath>

namespace npkry {

/// Plane rotation (c, s) with c^2 + s^2 = 1. Applied as
///   [ c  s] [h1]   [r]
///   [-s  c] [h2] = [0]
struct GivensPair {
  double c = 1.0;
  double s = 0.0;
};

struct GivensResult {
  GivensPair pair;
  double r = 0.0;       // rotated head; carries the sign of h1 when h1 != 0
  bool breakdown = false;
};

/// Breakdown when the column head is negligible relative to its inputs.
inline constexpr double kBreakdownRel = 1e-14;

/// Rotation annihilating h2 against h1. Convention: r = sign(h1)*hypot
/// when h1 != 0, else r = |h2| > 0, so c >= 0 always.
inline GivensResult givens_compute(double h1, double h2) {
  GivensResult out;
  const double mag = std::hypot(h1, h2);
  if (mag < kBreakdownRel * std::max({1.0, std::abs(h1), std::abs(h2)})) {
    out.breakdown = true;
    out.r = 0.0;
    return out;
  }
  const double r = (h1 != 0.0 && std::signbit(h1)) ? -mag : mag;
  out.pair.c = h1 / r;
  out.pair.s = h2 / r;
  out.r = r;
  return out;
}

/// In-place rotation of the pair (x, y).
inline void givens_apply(const GivensPair& g, double& x, double& y) {
  const double t = g.c * x + g.s * y;
  y = -g.s * x + g.c * y;
  x = t;
}

}  // namespace npkry
