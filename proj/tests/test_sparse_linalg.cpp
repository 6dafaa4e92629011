#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "npkry/dense_vector.hpp"
#include "npkry/error.hpp"
#include "npkry/givens.hpp"
#include "npkry/hessenberg.hpp"
#include "npkry/io.hpp"
#include "npkry/sparse_matrix.hpp"
#include "test_util.hpp"

using namespace npkry;

TEST_CASE("spmv identity, zero and diagonal cases") {
  const DenseVector x{1.0, 2.0, 3.0};
  CHECK(spmv(SparseMatrix::identity(3), x).raw() ==
        std::vector<double>{1.0, 2.0, 3.0});

  const SparseMatrix zero = SparseMatrix::from_triplets(3, 3, {});
  for (double v : spmv(zero, x)) CHECK(v == 0.0);

  const SparseMatrix d = SparseMatrix::from_triplets(
      2, 2, {{0, 0, 2.0}, {1, 1, 3.0}});
  const DenseVector y = spmv(d, DenseVector{1.0, 1.0});
  CHECK(y[0] == 2.0);
  CHECK(y[1] == 3.0);
}

TEST_CASE("spmv rejects dimension mismatch") {
  CHECK_THROWS_AS(spmv(SparseMatrix::identity(3), DenseVector{1.0, 2.0}),
                  Error);
}

TEST_CASE("spmv linearity") {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const SparseMatrix A = test::random_spd(12, rng);
    const DenseVector x = test::random_vector(12, rng);
    const DenseVector y = test::random_vector(12, rng);
    const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
    DenseVector combo(12, 0.0);
    for (std::size_t i = 0; i < 12; ++i) combo[i] = a * x[i] + b * y[i];
    const DenseVector lhs = spmv(A, combo);
    const DenseVector ax = spmv(A, x);
    const DenseVector ay = spmv(A, y);
    double scale = norm2(lhs);
    for (std::size_t i = 0; i < 12; ++i)
      CHECK(std::abs(lhs[i] - (a * ax[i] + b * ay[i])) <=
            1e-12 * std::max(1.0, scale));
  }
}

TEST_CASE("givens 3-4-5 triple and axis cases") {
  const GivensResult g = givens_compute(3.0, 4.0);
  CHECK(!g.breakdown);
  CHECK(g.pair.c == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(g.pair.s == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(g.r == doctest::Approx(5.0).epsilon(1e-15));

  const GivensResult ax = givens_compute(2.5, 0.0);
  CHECK(ax.pair.c == 1.0);
  CHECK(ax.pair.s == 0.0);
  const GivensResult ay = givens_compute(0.0, 1.5);
  CHECK(ay.pair.c == 0.0);
  CHECK(ay.pair.s == 1.0);
  CHECK(ay.r == 1.5);
}

TEST_CASE("givens unit circle, annihilation and sign convention") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const double h1 = rng.uniform(-5.0, 5.0);
    const double h2 = rng.uniform(-5.0, 5.0);
    const GivensResult g = givens_compute(h1, h2);
    if (g.breakdown) continue;
    CHECK(std::abs(g.pair.c * g.pair.c + g.pair.s * g.pair.s - 1.0) <= 1e-12);
    double x = h1, y = h2;
    givens_apply(g.pair, x, y);
    CHECK(std::abs(y) <= 1e-14 * std::abs(g.r));
    CHECK(x == doctest::Approx(g.r).epsilon(1e-14));
    if (h1 != 0.0) CHECK(std::signbit(g.r) == std::signbit(h1));
  }
  CHECK(givens_compute(0.0, 0.0).breakdown);
  CHECK(givens_compute(1e-20, -1e-20).breakdown);
}

TEST_CASE("mgs hand-checked cases") {
  // w orthogonal to the basis
  const std::vector<DenseVector> basis{DenseVector{1.0, 0.0, 0.0}};
  const MgsResult a = mgs_orthogonalize(DenseVector{0.0, 3.0, 4.0}, basis);
  CHECK(!a.breakdown);
  CHECK(a.coeffs[0] == 0.0);
  CHECK(a.h_next == doctest::Approx(5.0));
  CHECK(a.v_next[1] == doctest::Approx(0.6));
  CHECK(a.v_next[2] == doctest::Approx(0.8));

  // w equal to a basis vector: coefficient 1, breakdown
  const MgsResult b = mgs_orthogonalize(DenseVector{1.0, 0.0, 0.0}, basis);
  CHECK(b.breakdown);
  CHECK(b.coeffs[0] == doctest::Approx(1.0));

  // hand Gram-Schmidt: w=[1,1] against [1,0]
  const std::vector<DenseVector> e1{DenseVector{1.0, 0.0}};
  const MgsResult c = mgs_orthogonalize(DenseVector{1.0, 1.0}, e1);
  CHECK(!c.breakdown);
  CHECK(c.coeffs[0] == doctest::Approx(1.0));
  CHECK(c.h_next == doctest::Approx(1.0));
  CHECK(c.v_next[0] == doctest::Approx(0.0));
  CHECK(c.v_next[1] == doctest::Approx(1.0));
}

TEST_CASE("mgs produces an orthonormal extension up to dim 64") {
  Rng rng(13);
  const std::size_t n = 64;
  std::vector<DenseVector> basis;
  for (std::size_t k = 0; k < 24; ++k) {
    const MgsResult r = mgs_orthogonalize(test::random_vector(n, rng), basis);
    REQUIRE(!r.breakdown);
    basis.push_back(r.v_next);
  }
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double gram = dot(basis[i], basis[j]);
      CHECK(std::abs(gram - (i == j ? 1.0 : 0.0)) < 1e-10);
    }
}

namespace {

// brute-force least squares for || beta e_1 - H nu || via normal equations
DenseVector normal_equations_ls(const Hessenberg& H, double beta) {
  const std::size_t m = H.cols();
  std::vector<double> hth(m * m, 0.0), rhs(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < m + 1; ++k)
        hth[i * m + j] += H.at(k, i) * H.at(k, j);
  for (std::size_t i = 0; i < m; ++i) rhs[i] = H.at(0, i) * beta;
  return DenseVector(npkry::test::dense_solve(std::move(hth), std::move(rhs)));
}

Hessenberg random_hessenberg(std::size_t m, Rng& rng) {
  Hessenberg H(m + 1, m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i <= j + 1; ++i)
      H.at(i, j) = rng.uniform(-2.0, 2.0);
    // keep the subdiagonal well away from breakdown
    if (std::abs(H.at(j + 1, j)) < 0.2) H.at(j + 1, j) = 0.7;
  }
  return H;
}

}  // namespace

TEST_CASE("dense_solve_ls single column") {
  Hessenberg H(2, 1);
  H.at(0, 0) = 2.0;
  H.at(1, 0) = 0.0;
  const DenseVector nu = dense_solve_ls(H, 4.0);
  CHECK(nu[0] == doctest::Approx(2.0));
  CHECK(dense_solve_ls_residual(H, 4.0) == doctest::Approx(0.0));
}

TEST_CASE("dense_solve_ls matches the normal-equations oracle") {
  Rng rng(17);
  const Hessenberg H5 = random_hessenberg(4, rng);
  const DenseVector fast = dense_solve_ls(H5, 1.7);
  const DenseVector slow = normal_equations_ls(H5, 1.7);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(std::abs(fast[i] - slow[i]) <= 1e-10 * std::max(1.0, norm2(slow)));

  for (std::size_t m : {8, 14, 20}) {
    const Hessenberg H = random_hessenberg(m, rng);
    const double beta = rng.uniform(0.5, 3.0);
    const DenseVector a = dense_solve_ls(H, beta);
    const DenseVector b = normal_equations_ls(H, beta);
    for (std::size_t i = 0; i < m; ++i)
      CHECK(std::abs(a[i] - b[i]) <= 1e-9 * std::max(1.0, norm2(b)));
  }
}

TEST_CASE("matrix market round trip") {
  Rng rng(23);
  const SparseMatrix A = test::random_spd(9, rng);
  const auto path = std::filesystem::temp_directory_path() / "npkry_rt.mtx";
  write_matrix_market(A, path);
  const SparseMatrix B = read_matrix_market(path);
  REQUIRE(B.rows() == A.rows());
  REQUIRE(B.nnz() == A.nnz());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j)
      CHECK(B.coeff(i, j) == A.coeff(i, j));  // %.17g is exact for doubles
  std::filesystem::remove(path);
}

TEST_CASE("matrix market reads symmetric storage") {
  const auto path = std::filesystem::temp_directory_path() / "npkry_sym.mtx";
  {
    std::ofstream out(path);
    out << "%%MatrixMarket matrix coordinate real symmetric\n"
        << "% lower triangle only\n"
        << "2 2 3\n1 1 2.0\n2 1 -1.0\n2 2 2.0\n";
  }
  const SparseMatrix A = read_matrix_market(path);
  CHECK(A.coeff(0, 1) == -1.0);
  CHECK(A.coeff(1, 0) == -1.0);
  CHECK(A.is_symmetric());
  std::filesystem::remove(path);
}

TEST_CASE("vector blob round trip") {
  Rng rng(29);
  const DenseVector v = test::random_vector(33, rng);
  const auto path = std::filesystem::temp_directory_path() / "npkry_rt.vec";
  write_vector_blob(v, path);
  CHECK(read_vector_blob(path).raw() == v.raw());
  std::filesystem::remove(path);
}

TEST_CASE("csv quoting round trip") {
  const std::vector<std::string> fields{"plain", "with,comma", "with\"quote",
                                        "multi\nline", ""};
  const std::string line = csv_row(fields);
  const auto parsed = csv_split(line.substr(0, line.size() - 1));
  CHECK(parsed == fields);
}
