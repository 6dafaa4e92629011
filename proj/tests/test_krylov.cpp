#include <doctest.h>

#include <cmath>

#include "npkry/ag.hpp"
#include "npkry/error.hpp"
#include "npkry/fgmres.hpp"
#include "npkry/sines.hpp"
#include "npkry/unet.hpp"
#include "test_util.hpp"

using namespace npkry;

TEST_CASE("extract_sines single-column cases") {
  Hessenberg H(2, 1);
  H.at(0, 0) = 1.0;
  H.at(1, 0) = 2.0;
  const auto s = extract_sines(H, SineMethod::kRotationComponent);
  CHECK(s[0] == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-14));

  H.at(1, 0) = 0.0;
  CHECK(extract_sines(H, SineMethod::kRotationComponent)[0] == 0.0);
  CHECK(extract_sines(H, SineMethod::kGivensRatio)[0] == 0.0);
}

TEST_CASE("extract_sines: ratio and rotation methods agree") {
  Rng rng(71);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 5;
    Hessenberg H(m + 1, m);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t i = 0; i <= j + 1; ++i)
        H.at(i, j) = rng.uniform(-2.0, 2.0);
    const auto a = extract_sines(H, SineMethod::kGivensRatio);
    const auto b = extract_sines(H, SineMethod::kRotationComponent);
    REQUIRE(a.size() == b.size());
    for (std::size_t j = 0; j < m; ++j) CHECK(std::abs(a[j] - b[j]) <= 1e-12);
  }
}

TEST_CASE("principal angle sine hand cases") {
  CHECK(principal_angle_sine(DenseVector{1.0, 0.0},
                             {DenseVector{0.0, 1.0}}) == doctest::Approx(1.0));
  CHECK(principal_angle_sine(DenseVector{2.0, 4.0},
                             {DenseVector{1.0, 2.0}}) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(principal_angle_sine(DenseVector{1.0, 1.0}, {DenseVector{1.0, 2.0}}) ==
        doctest::Approx(1.0 / std::sqrt(10.0)).epsilon(1e-12));
  CHECK(principal_angle_sine(DenseVector{1.0, 1.0}, {}) == 1.0);
}

namespace {

const ProblemInstance& dummy_instance() {
  static const ProblemInstance inst = [] {
    ProblemInstance p;
    p.grid_n = 4;
    return p;
  }();
  return inst;
}

PrecondFn identity_fn() {
  return [](const DenseVector& v) { return v; };
}

struct Replay {
  std::vector<DenseVector> residuals;  // r_0 .. r_m, explicit
  std::vector<DenseVector> W;          // A z_0 .. A z_{m-1}
};

Replay replay_trace(const SparseMatrix& A, const DenseVector& b,
                    const KrylovTrace& tr) {
  Replay out;
  out.residuals.push_back(b);
  const std::size_t m = tr.H.cols();
  const double beta = tr.res_norms[0];
  for (std::size_t j = 1; j <= m; ++j) {
    Hessenberg Hj(j + 1, j);
    for (std::size_t i = 0; i <= j; ++i)
      for (std::size_t c = 0; c < j; ++c) Hj.at(i, c) = tr.H.at(i, c);
    const DenseVector nu = dense_solve_ls(Hj, beta);
    DenseVector x(b.size(), 0.0);
    for (std::size_t c = 0; c < j; ++c) axpy(nu[c], tr.Z[c], x);
    out.residuals.push_back(subtract(b, spmv(A, x)));
  }
  for (const auto& z : tr.Z) out.W.push_back(spmv(A, z));
  return out;
}

// textbook GMRES with explicit residuals, built independently of the
// solver under test; sines oracle: ||r_j|| / ||r_{j-1}||
std::vector<double> gmres_residual_ratio_oracle(const SparseMatrix& A,
                                                const DenseVector& b,
                                                std::size_t steps) {
  std::vector<DenseVector> V{scaled(b, 1.0 / norm2(b))};
  std::vector<DenseVector> W;
  std::vector<double> res{norm2(b)};
  for (std::size_t j = 0; j < steps; ++j) {
    DenseVector w = spmv(A, V[j]);
    W.push_back(w);
    for (const auto& v : V) axpy(-dot(w, v), v, w);
    for (const auto& v : V) axpy(-dot(w, v), v, w);  // full reorth
    const double h = norm2(w);
    if (h < 1e-13) break;
    scal(1.0 / h, w);
    V.push_back(w);
    // projection-based residual: || (I - P_W) b ||
    DenseVector r = b;
    std::vector<DenseVector> Wq;
    for (const auto& wc : W) {
      DenseVector q = wc;
      for (const auto& qq : Wq) axpy(-dot(q, qq), qq, q);
      for (const auto& qq : Wq) axpy(-dot(q, qq), qq, q);
      scal(1.0 / norm2(q), q);
      Wq.push_back(q);
    }
    for (const auto& q : Wq) axpy(-dot(r, q), q, r);
    res.push_back(norm2(r));
  }
  std::vector<double> sines;
  for (std::size_t j = 1; j < res.size(); ++j) sines.push_back(res[j] / res[j - 1]);
  return sines;
}

}  // namespace

TEST_CASE("fgmres on the identity converges in one step") {
  const SparseMatrix I = SparseMatrix::identity(5);
  Rng rng(73);
  const DenseVector b = test::random_vector(5, rng, 0.3, 1.0);
  const FgmresResult res = fgmres(I, b, identity_fn());
  CHECK(res.iters == 1);
  CHECK(res.converged);
  CHECK(res.trace.sines[0] == 0.0);
  CHECK(res.final_residual <= 1e-13 * norm2(b));
  CHECK(res.trace.breakdown_at.has_value());
}

TEST_CASE("fgmres finite termination on a 2x2 diagonal") {
  const SparseMatrix A =
      SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, 2.0}});
  const DenseVector b{1.0, 1.0};
  FgmresOptions opts;
  opts.tol = 1e-12;
  const FgmresResult res = fgmres(A, b, identity_fn(), opts);
  CHECK(res.iters == 2);
  CHECK(res.converged);
  // projection oracle: r_0 = [1,1], W_1 = span{[1,2]}
  CHECK(res.trace.sines[0] ==
        doctest::Approx(1.0 / std::sqrt(10.0)).epsilon(1e-12));
}

TEST_CASE("fgmres identity-preconditioned sines match the residual-ratio "
          "oracle") {
  Rng rng(79);
  const SparseMatrix A = test::random_spd(24, rng);
  const DenseVector b = test::random_vector(24, rng, 0.2, 1.0);
  FgmresOptions opts;
  opts.tol = 1e-10;
  opts.max_iter = 12;
  const FgmresResult res = fgmres(A, b, identity_fn(), opts);
  const auto oracle = gmres_residual_ratio_oracle(A, b, res.iters);
  REQUIRE(oracle.size() >= res.trace.sines.size());
  for (std::size_t j = 0; j < res.trace.sines.size(); ++j)
    CHECK(std::abs(res.trace.sines[j] - oracle[j]) <= 1e-8);
}

TEST_CASE("trace invariants: Arnoldi relation, recurrence, orthonormality, "
          "nestedness, principal-angle oracle") {
  Rng rng(83);
  for (const std::size_t n : {16, 32}) {
    const SparseMatrix A = test::random_spd(n, rng);
    const DenseVector b = test::random_vector(n, rng, 0.2, 1.0);
    DenseVector jitter = test::random_vector(n, rng, 0.5, 1.5);
    const DiagonalPreconditioner diag_pre(jitter);
    const PrecondFn preconds[] = {
        identity_fn(),
        [&](const DenseVector& v) { return diag_pre.apply(v, dummy_instance()); }};
    for (const auto& pre : preconds) {
      FgmresOptions opts;
      opts.tol = 1e-9;
      opts.max_iter = 10;
      const FgmresResult res = fgmres(A, b, pre, opts);
      const KrylovTrace& tr = res.trace;
      const std::size_t m = tr.H.cols();
      const Replay rep = replay_trace(A, b, tr);

      // flexible Arnoldi relation, column by column, Frobenius overall
      double err2 = 0.0, z2 = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        DenseVector lhs = rep.W[c];
        for (std::size_t i = 0; i <= m; ++i)
          if (i < tr.V.size()) axpy(-tr.H.at(i, c), tr.V[i], lhs);
        err2 += dot(lhs, lhs);
        z2 += dot(tr.Z[c], tr.Z[c]);
      }
      CHECK(std::sqrt(err2) <= 1e-10 * A.norm_inf() * std::sqrt(z2));

      // orthonormal basis (ignoring a trailing breakdown placeholder)
      const std::size_t nv =
          tr.breakdown_at ? tr.V.size() - 1 : tr.V.size();
      for (std::size_t i = 0; i < nv; ++i)
        for (std::size_t j = 0; j <= i; ++j)
          CHECK(std::abs(dot(tr.V[i], tr.V[j]) - (i == j ? 1.0 : 0.0)) <
                1e-9);

      // residual recurrence, explicit residuals vs extracted sines
      const double r0n = norm2(rep.residuals[0]);
      for (std::size_t j = 1; j <= m; ++j) {
        const double rj = norm2(rep.residuals[j]);
        const double rprev = norm2(rep.residuals[j - 1]);
        CHECK(std::abs(rj - tr.sines[j - 1] * rprev) <= 1e-9 * r0n);
        CHECK(std::abs(rj - tr.res_norms[j]) <= 1e-9 * r0n);
        double prod = r0n;
        for (std::size_t k = 0; k < j; ++k) prod *= tr.sines[k];
        CHECK(std::abs(rj - prod) <= 1e-8 * r0n);
      }

      // principal-angle oracle and nestedness of the image spaces
      std::vector<DenseVector> Wj;
      for (std::size_t j = 1; j <= m; ++j) {
        Wj.push_back(rep.W[j - 1]);
        const double oracle = principal_angle_sine(rep.residuals[j - 1], Wj);
        CHECK(std::abs(oracle - tr.sines[j - 1]) <= 1e-9);
        if (j >= 2) {
          std::vector<DenseVector> Wprev(Wj.begin(), Wj.end() - 1);
          for (const auto& w : Wprev)
            CHECK(principal_angle_sine(w, Wj) <= 1e-9);
        }
      }

      // sines in the trace equal the Hessenberg extraction
      const auto hs = extract_sines(tr.H, SineMethod::kRotationComponent);
      for (std::size_t j = 0; j < m; ++j)
        CHECK(std::abs(hs[j] - tr.sines[j]) <= 1e-12);
    }
  }
}

TEST_CASE("fgmres residual history is bit-stable across runs") {
  Rng rng(89);
  const SparseMatrix A = test::random_spd(20, rng);
  const DenseVector b = test::random_vector(20, rng, 0.2, 1.0);
  const FgmresResult a = fgmres(A, b, identity_fn());
  const FgmresResult c = fgmres(A, b, identity_fn());
  CHECK(a.trace.res_norms == c.trace.res_norms);
  CHECK(a.x == c.x);
}

TEST_CASE("fgmres flags stagnation at max_iter") {
  Rng rng(97);
  const SparseMatrix A = test::random_spd(30, rng, 0.01);
  const DenseVector b = test::random_vector(30, rng, 0.2, 1.0);
  FgmresOptions opts;
  opts.tol = 1e-14;
  opts.max_iter = 3;
  const FgmresResult res = fgmres(A, b, identity_fn(), opts);
  CHECK(!res.converged);
  CHECK(res.iters == 3);
}

TEST_CASE("ag_m with the exact inverse breaks down immediately") {
  Rng rng(101);
  const SparseMatrix A = test::random_spd(10, rng);
  const DenseVector r0 = test::random_vector(10, rng, 0.2, 1.0);
  ad::Tape t;
  const AgResult ag = ag_m(
      t, A, r0,
      [&](ad::Tape& tape, ad::Var v) {
        const DenseVector sol =
            test::dense_solve(A, DenseVector(std::vector<double>(
                                     v.value().begin(), v.value().end())));
        return tape.constant(sol.raw(), {sol.size()});
      },
      3);
  CHECK(ag.breakdown_at.has_value());
  for (const auto& s : ag.sines) CHECK(std::abs(s.value0()) <= 1e-12);
}

TEST_CASE("ag_m with identity preconditioner equals solver sines") {
  Rng rng(103);
  const SparseMatrix A = test::random_spd(16, rng);
  const DenseVector b = test::random_vector(16, rng, 0.2, 1.0);
  const std::size_t M = 6;
  ad::Tape t;
  const AgResult ag =
      ag_m(t, A, scaled(b, 1.0 / norm2(b)),
           [](ad::Tape&, ad::Var v) { return v; }, M);
  FgmresOptions opts;
  opts.tol = 1e-14;
  opts.max_iter = M;
  const FgmresResult res = fgmres(A, b, identity_fn(), opts);
  REQUIRE(res.trace.sines.size() == M);
  for (std::size_t j = 0; j < M; ++j)
    CHECK(std::abs(ag.sines[j].value0() - res.trace.sines[j]) <= 1e-10);
}

TEST_CASE("ag_m rejects a preconditioner that yields non-finite output") {
  Rng rng(107);
  const SparseMatrix A = test::random_spd(6, rng);
  const DenseVector r0 = test::random_vector(6, rng, 0.2, 1.0);
  ad::Tape t;
  CHECK_THROWS(ag_m(
      t, A, r0,
      [](ad::Tape& tape, ad::Var v) {
        std::vector<double> bad(ad::numel(v.shape()), 0.0);
        bad[0] = std::numeric_limits<double>::quiet_NaN();
        return tape.constant(bad, v.shape());
      },
      2));
}
