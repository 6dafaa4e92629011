#pragma once

#include <filesystem>

#include "npkry/dense_vector.hpp"
#include "npkry/geometry.hpp"
#include "npkry/sparse_matrix.hpp"

namespace npkry {

/// One member of the parametrized SPD family: A = K + 2*pi*eps*M with K
/// the 7-point Dirichlet Laplacian on the interior tensor grid and M the
/// diagonal tube-weight coupling.
struct ProblemInstance {
  SparseMatrix A;
  DenseVector b;   // physical right-hand side, supported on the tube
  DenseVector d;   // per-node tube weight field (the parameter field)
  Geometry1D mu;
  double eps = 0.1;
  std::size_t grid_n = 0;

  std::size_t dim() const { return grid_n * grid_n * grid_n; }
};

/// Assembles the grid surrogate for a geometry. Tube radius is 2h with
/// h = 1/(grid_n + 1); the 1D surrogate system along arc length is solved
/// with a seeded 3-term Fourier forcing to produce b. Throws when the
/// geometry misses every grid node (empty tube).
ProblemInstance assemble(const Geometry1D& geometry, std::size_t grid_n,
                         double eps);

/// Dirichlet Laplacian alone (the eps = 0 operator).
SparseMatrix assemble_laplacian(std::size_t grid_n);

/// Instance directory: matrix.mtx, b.vec, d.vec, geometry.json, meta.
void write_instance(const ProblemInstance& inst,
                    const std::filesystem::path& dir);
ProblemInstance read_instance(const std::filesystem::path& dir);

}  // namespace npkry
