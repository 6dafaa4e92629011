#include "npkry/rhs.hpp"

#include "npkry/error.hpp"

namespace npkry {

DenseVector sample_sphere(std::size_t dim, Rng& rng) {
  check(dim >= 1, "sample_sphere: dim must be positive");
  DenseVector v(dim, 0.0);
  double nrm = 0.0;
  while (nrm == 0.0) {
    for (auto& x : v) x = rng.normal();
    nrm = norm2(v);
  }
  scal(1.0 / nrm, v);
  return v;
}

DenseVector sample_sphere(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  return sample_sphere(dim, rng);
}

RhsSet build_rhs_set(const ProblemInstance& instance, std::size_t n_augment,
                     std::uint64_t seed) {
  const double bnorm = norm2(instance.b);
  check(bnorm > 0.0, "build_rhs_set: zero right-hand side");
  RhsSet set;
  set.canonical = scaled(instance.b, 1.0 / bnorm);
  Rng rng = Rng::child(seed, 0xa06e57);
  set.augmented.reserve(n_augment);
  for (std::size_t i = 0; i < n_augment; ++i)
    set.augmented.push_back(sample_sphere(instance.dim(), rng));
  return set;
}

}  // namespace npkry
