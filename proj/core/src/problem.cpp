#include "npkry/problem.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "npkry/error.hpp"
#include "npkry/io.hpp"
#include "npkry/rng.hpp"

namespace npkry {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

std::size_t node_index(std::size_t n, std::size_t i, std::size_t j,
                       std::size_t k) {
  return (i * n + j) * n + k;
}

Point3 node_position(std::size_t n, std::size_t i, std::size_t j,
                     std::size_t k) {
  const double h = 1.0 / static_cast<double>(n + 1);
  return {static_cast<double>(i + 1) * h, static_cast<double>(j + 1) * h,
          static_cast<double>(k + 1) * h};
}

// Thomas algorithm for the SPD tridiagonal 1D surrogate.
std::vector<double> solve_tridiagonal(std::vector<double> diag,
                                      std::vector<double> off,
                                      std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = off[i - 1] / diag[i - 1];
    diag[i] -= m * off[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    x[i] = (rhs[i] - off[i] * x[i + 1]) / diag[i];
  return x;
}

}  // namespace

SparseMatrix assemble_laplacian(std::size_t grid_n) {
  check(grid_n >= 4, "assemble: grid_n must be at least 4");
  const std::size_t n = grid_n;
  const double h = 1.0 / static_cast<double>(n + 1);
  const double inv_h2 = 1.0 / (h * h);
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(7 * n * n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t row = node_index(n, i, j, k);
        trip.emplace_back(row, row, 6.0 * inv_h2);
        if (i > 0) trip.emplace_back(row, node_index(n, i - 1, j, k), -inv_h2);
        if (i + 1 < n)
          trip.emplace_back(row, node_index(n, i + 1, j, k), -inv_h2);
        if (j > 0) trip.emplace_back(row, node_index(n, i, j - 1, k), -inv_h2);
        if (j + 1 < n)
          trip.emplace_back(row, node_index(n, i, j + 1, k), -inv_h2);
        if (k > 0) trip.emplace_back(row, node_index(n, i, j, k - 1), -inv_h2);
        if (k + 1 < n)
          trip.emplace_back(row, node_index(n, i, j, k + 1), -inv_h2);
      }
  const std::size_t dim = n * n * n;
  return SparseMatrix::from_triplets(dim, dim, std::move(trip));
}

ProblemInstance assemble(const Geometry1D& geometry, std::size_t grid_n,
                         double eps) {
  check(grid_n >= 4, "assemble: grid_n must be at least 4");
  check(eps >= 0.0, "assemble: eps must be nonnegative");
  check(!geometry.segments.empty(), "assemble: geometry has no segments");
  const std::size_t n = grid_n;
  const std::size_t dim = n * n * n;
  const double h = 1.0 / static_cast<double>(n + 1);
  const double rho = 2.0 * h;

  // tube weight field
  DenseVector w(dim, 0.0);
  bool tube_nonempty = false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        const double dist =
            distance_to_geometry(node_position(n, i, j, k), geometry);
        const double weight = std::max(0.0, 1.0 - dist / rho);
        w[node_index(n, i, j, k)] = weight;
        if (weight > 0.0) tube_nonempty = true;
      }
  check(tube_nonempty, "assemble: empty tube, geometry misses the grid");

  // A = K + 2*pi*eps*M, M diagonal with the tube weights
  const double inv_h2 = 1.0 / (h * h);
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(7 * dim);
  const double coupling = kTwoPi * eps;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t row = node_index(n, i, j, k);
        trip.emplace_back(row, row, 6.0 * inv_h2 + coupling * w[row]);
        if (i > 0) trip.emplace_back(row, node_index(n, i - 1, j, k), -inv_h2);
        if (i + 1 < n)
          trip.emplace_back(row, node_index(n, i + 1, j, k), -inv_h2);
        if (j > 0) trip.emplace_back(row, node_index(n, i, j - 1, k), -inv_h2);
        if (j + 1 < n)
          trip.emplace_back(row, node_index(n, i, j + 1, k), -inv_h2);
        if (k > 0) trip.emplace_back(row, node_index(n, i, j, k - 1), -inv_h2);
        if (k + 1 < n)
          trip.emplace_back(row, node_index(n, i, j, k + 1), -inv_h2);
      }

  ProblemInstance inst;
  inst.A = SparseMatrix::from_triplets(dim, dim, std::move(trip));
  inst.d = w;
  inst.mu = geometry;
  inst.eps = eps;
  inst.grid_n = grid_n;

  // 1D surrogate along arc length: tridiagonal Laplacian plus coupling
  // mass, forced by a seeded smooth 3-term Fourier series.
  const double length = geometry.total_length();
  const std::size_t n1 =
      std::max<std::size_t>(2, static_cast<std::size_t>(
                                   std::ceil(length / h)));
  const double h1 = length / static_cast<double>(n1 - 1);
  std::vector<double> diag(n1, 2.0 / (h1 * h1) + coupling);
  std::vector<double> off(n1 - 1, -1.0 / (h1 * h1));
  Rng frng = Rng::child(geometry.seed, 0x1d5eed);
  double amp_sin[3], amp_cos[3];
  for (int m = 0; m < 3; ++m) {
    amp_sin[m] = frng.normal();
    amp_cos[m] = frng.normal();
  }
  std::vector<double> forcing(n1, 0.0);
  for (std::size_t l = 0; l < n1; ++l) {
    const double s = static_cast<double>(l) * h1 / length;  // in [0,1]
    for (int m = 0; m < 3; ++m) {
      const double phase = static_cast<double>(m + 1) * 3.14159265358979323846 * s;
      forcing[l] += amp_sin[m] * std::sin(phase) + amp_cos[m] * std::cos(phase);
    }
  }
  const std::vector<double> x1 = solve_tridiagonal(diag, off, forcing);

  // b = -2*pi*eps * M01 * x1: each 1D nodal value spreads to nearby tube
  // nodes with weights w normalized per 1D node
  inst.b = DenseVector(dim, 0.0);
  if (eps == 0.0) return inst;  // decoupled limit: b stays exactly zero
  for (std::size_t l = 0; l < n1; ++l) {
    const Point3 p = geometry.point_at_arc_length(static_cast<double>(l) * h1);
    // gather tube nodes within the kernel radius of this 1D node
    std::vector<std::pair<std::size_t, double>> local;
    const auto lo = [&](double c) {
      return static_cast<std::size_t>(
          std::max(0.0, std::floor((c - rho) / h - 1.0)));
    };
    const auto hi = [&](double c) {
      return std::min(n - 1, static_cast<std::size_t>(std::max(
                                 0.0, std::ceil((c + rho) / h - 1.0))));
    };
    double total = 0.0;
    for (std::size_t i = lo(p[0]); i <= hi(p[0]); ++i)
      for (std::size_t j = lo(p[1]); j <= hi(p[1]); ++j)
        for (std::size_t k = lo(p[2]); k <= hi(p[2]); ++k) {
          const std::size_t q = node_index(n, i, j, k);
          if (w[q] <= 0.0) continue;
          const Point3 pos = node_position(n, i, j, k);
          const double dx = pos[0] - p[0], dy = pos[1] - p[1],
                       dz = pos[2] - p[2];
          if (dx * dx + dy * dy + dz * dz > rho * rho) continue;
          local.emplace_back(q, w[q]);
          total += w[q];
        }
    if (total <= 0.0) continue;  // isolated 1D node, nothing nearby
    for (const auto& [q, weight] : local)
      inst.b[q] += -coupling * (weight / total) * x1[l];
  }
  return inst;
}

void write_instance(const ProblemInstance& inst,
                    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix_market(inst.A, dir / "matrix.mtx");
  write_vector_blob(inst.b, dir / "b.vec");
  write_vector_blob(inst.d, dir / "d.vec");
  write_geometry(inst.mu, dir / "geometry.json");
  std::ofstream meta(dir / "meta");
  check(meta.good(), "cannot write meta in " + dir.string());
  meta << "grid_n = " << inst.grid_n << "\n";
  meta << "eps = " << format_double(inst.eps) << "\n";
  meta << "seed = " << inst.mu.seed << "\n";
  check(meta.good(), "write failed: " + (dir / "meta").string());
}

ProblemInstance read_instance(const std::filesystem::path& dir) {
  ProblemInstance inst;
  inst.A = read_matrix_market(dir / "matrix.mtx");
  inst.b = read_vector_blob(dir / "b.vec");
  inst.d = read_vector_blob(dir / "d.vec");
  inst.mu = read_geometry(dir / "geometry.json");
  std::ifstream meta(dir / "meta");
  check(meta.good(), "cannot open: " + (dir / "meta").string());
  std::string line;
  while (std::getline(meta, line)) {
    std::istringstream ls(line);
    std::string key, eq;
    ls >> key >> eq;
    if (key == "grid_n") ls >> inst.grid_n;
    if (key == "eps") ls >> inst.eps;
  }
  check(inst.grid_n >= 4, "meta: missing or bad grid_n");
  check(inst.dim() == inst.A.rows(), "instance dimension mismatch");
  return inst;
}

}  // namespace npkry
