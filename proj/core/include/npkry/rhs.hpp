#pragma once

#include <cstdint>
#include <vector>

#include "npkry/dense_vector.hpp"
#include "npkry/problem.hpp"
#include "npkry/rng.hpp"

namespace npkry {

/// Training right-hand sides for one instance: the normalized physical
/// rhs plus hypersphere augmentation samples, all unit norm.
struct RhsSet {
  DenseVector canonical;
  std::vector<DenseVector> augmented;

  std::size_t size() const { return 1 + augmented.size(); }
  const DenseVector& at(std::size_t i) const {
    return i == 0 ? canonical : augmented[i - 1];
  }
};

/// Uniform draw from the unit hypersphere: Gaussian vector, normalized.
DenseVector sample_sphere(std::size_t dim, Rng& rng);
DenseVector sample_sphere(std::size_t dim, std::uint64_t seed);

/// Default n_augment = 4 gives |set| = 5.
RhsSet build_rhs_set(const ProblemInstance& instance, std::size_t n_augment,
                     std::uint64_t seed);

}  // namespace npkry
