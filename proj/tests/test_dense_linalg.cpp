#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "moldflux/dense.hpp"
#include "moldflux/errors.hpp"

using namespace moldflux;

namespace {

DenseMatrix random_matrix(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix A(n, n);
  for (double& v : A.data) v = u(rng);
  return A;
}

double frob(const DenseMatrix& A) {
  double s = 0.0;
  for (double v : A.data) s += v * v;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("lu solve: identity and diagonal systems") {
  DenseMatrix I(3, 3);
  for (int i = 0; i < 3; ++i) I.at(i, i) = 1.0;
  const std::vector<double> c{1.0, -2.0, 0.5};
  LuResult r = lu_solve_full_pivot(I, c);
  for (int i = 0; i < 3; ++i) CHECK(r.x[static_cast<std::size_t>(i)] == doctest::Approx(c[static_cast<std::size_t>(i)]));
  CHECK(r.condition_estimate == doctest::Approx(1.0));

  DenseMatrix D(2, 2);
  D.at(0, 0) = 2.0;
  D.at(1, 1) = 4.0;
  LuResult d = lu_solve_full_pivot(D, {2.0, 8.0});
  CHECK(d.x[0] == doctest::Approx(1.0));
  CHECK(d.x[1] == doctest::Approx(2.0));
  CHECK(d.condition_estimate == doctest::Approx(2.0));
}

TEST_CASE("lu solve: random system solves to machine precision") {
  const int n = 20;
  DenseMatrix A = random_matrix(n, 42);
  std::vector<double> x_true(n);
  for (int i = 0; i < n; ++i) x_true[static_cast<std::size_t>(i)] = std::sin(0.7 * i);
  const std::vector<double> c = matvec(A, x_true);
  LuResult r = lu_solve_full_pivot(A, c);
  for (int i = 0; i < n; ++i) {
    CHECK(r.x[static_cast<std::size_t>(i)] == doctest::Approx(x_true[static_cast<std::size_t>(i)]).epsilon(1e-9));
  }
}

TEST_CASE("lu solve: duplicated row is rejected as singular") {
  DenseMatrix A = random_matrix(4, 3);
  for (int j = 0; j < 4; ++j) A.at(2, j) = A.at(0, j);
  CHECK_THROWS_AS(lu_solve_full_pivot(A, {1.0, 2.0, 3.0, 4.0}), SingularMatrix);
}

TEST_CASE("lu factors can be reused across right-hand sides") {
  const int n = 12;
  DenseMatrix A = random_matrix(n, 9);
  const LuFactors f = lu_factor_full_pivot(A);
  CHECK(f.condition_estimate >= 1.0);
  for (unsigned trial = 0; trial < 3; ++trial) {
    std::vector<double> x_true(n);
    for (int i = 0; i < n; ++i) x_true[static_cast<std::size_t>(i)] = std::cos(trial + 0.3 * i);
    const std::vector<double> c = matvec(A, x_true);
    const std::vector<double> x = f.solve(c);
    for (int i = 0; i < n; ++i) CHECK(x[static_cast<std::size_t>(i)] == doctest::Approx(x_true[static_cast<std::size_t>(i)]).epsilon(1e-9));
  }
}

TEST_CASE("svd: diagonal spectrum, zero matrix rank, reconstruction") {
  DenseMatrix D(2, 2);
  D.at(0, 0) = 3.0;
  D.at(1, 1) = 1.0;
  SvdResult s = svd(D);
  REQUIRE(s.rank == 2u);
  CHECK(s.sigma[0] == doctest::Approx(3.0));
  CHECK(s.sigma[1] == doctest::Approx(1.0));

  DenseMatrix Z(3, 3);
  CHECK(svd(Z).rank == 0u);

  DenseMatrix A = random_matrix(5, 17);
  SvdResult r = svd(A);
  REQUIRE(r.rank == 5u);
  // rebuild U diag(sigma) V^T and compare
  DenseMatrix R(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      double acc = 0.0;
      for (std::size_t q = 0; q < r.rank; ++q) acc += r.U.at(i, q) * r.sigma[q] * r.V.at(j, q);
      R.at(i, j) = A.at(i, j) - acc;
    }
  CHECK(frob(R) / frob(A) <= 1e-12);
}

TEST_CASE("svd: singular values are decreasing and factors are orthonormal") {
  DenseMatrix A = random_matrix(8, 23);
  SvdResult s = svd(A);
  for (std::size_t i = 0; i + 1 < s.rank; ++i) CHECK(s.sigma[i] >= s.sigma[i + 1]);
  for (std::size_t a = 0; a < s.rank; ++a)
    for (std::size_t b = 0; b < s.rank; ++b) {
      double uu = 0.0, vv = 0.0;
      for (int r = 0; r < 8; ++r) {
        uu += s.U.at(r, a) * s.U.at(r, b);
        vv += s.V.at(r, a) * s.V.at(r, b);
      }
      const double want = a == b ? 1.0 : 0.0;
      CHECK(uu == doctest::Approx(want).epsilon(1e-10));
      CHECK(vv == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("svd of a symmetric PSD matrix equals its eigenvalues") {
  DenseMatrix B = random_matrix(6, 31);
  DenseMatrix K = matmul_at_b(B, B);  // B^T B is symmetric PSD
  SvdResult s = svd(K);
  // sigma_i of K equal eigenvalues of K equal squared singular values of B
  SvdResult sb = svd(B);
  REQUIRE(s.rank == sb.rank);
  for (std::size_t i = 0; i < s.rank; ++i) {
    CHECK(s.sigma[i] == doctest::Approx(sb.sigma[i] * sb.sigma[i]).epsilon(1e-9));
  }
}

TEST_CASE("tsvd: identity passthrough and hand-computed truncation") {
  DenseMatrix I(3, 3);
  for (int i = 0; i < 3; ++i) I.at(i, i) = 1.0;
  const std::vector<double> c{2.0, -1.0, 4.0};
  const std::vector<double> z = tsvd_solve(I, c, 3);
  for (int i = 0; i < 3; ++i) CHECK(z[static_cast<std::size_t>(i)] == doctest::Approx(c[static_cast<std::size_t>(i)]));

  DenseMatrix D(2, 2);
  D.at(0, 0) = 2.0;
  D.at(1, 1) = 1e-8;
  const std::vector<double> z1 = tsvd_solve(D, {2.0, 1e-8}, 1);
  CHECK(z1[0] == doctest::Approx(1.0));
  CHECK(z1[1] == doctest::Approx(0.0));
}

TEST_CASE("tsvd at full rank matches LU on a nonsingular system") {
  const int n = 10;
  DenseMatrix B = random_matrix(n, 51);
  DenseMatrix K = matmul_at_b(B, B);
  for (int i = 0; i < n; ++i) K.at(i, i) += 0.5;
  std::vector<double> c(n);
  for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] = std::sin(1.1 * i);
  SvdResult s = svd(K);
  REQUIRE(s.rank == static_cast<std::size_t>(n));
  const std::vector<double> zt = tsvd_solve(s, c, s.rank);
  const std::vector<double> zl = lu_solve_full_pivot(K, c).x;
  for (int i = 0; i < n; ++i) {
    CHECK(std::abs(zt[static_cast<std::size_t>(i)] - zl[static_cast<std::size_t>(i)]) <= 1e-10);
  }
}

TEST_CASE("tsvd residual is non-increasing in alpha") {
  const int n = 9;
  DenseMatrix B = random_matrix(n, 77);
  DenseMatrix K = matmul_at_b(B, B);
  std::vector<double> c(n);
  for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] = std::cos(0.9 * i);
  SvdResult s = svd(K);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t a = 1; a <= s.rank; ++a) {
    const std::vector<double> z = tsvd_solve(s, c, a);
    const std::vector<double> Kz = matvec(K, z);
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = Kz[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(i)];
      res += d * d;
    }
    res = std::sqrt(res);
    CHECK(res <= prev * (1.0 + 1e-12));
    prev = res;
  }
}

TEST_CASE("tsvd rejects out-of-range truncation counts") {
  DenseMatrix D(2, 2);
  D.at(0, 0) = 1.0;
  D.at(1, 1) = 1.0;
  CHECK_THROWS_AS(tsvd_solve(D, {1.0, 1.0}, 0), InvalidArgument);
  CHECK_THROWS_AS(tsvd_solve(D, {1.0, 1.0}, 3), InvalidArgument);
  DenseMatrix Z(2, 2);
  CHECK_THROWS_AS(tsvd_solve(Z, {1.0, 1.0}, 1), SingularMatrix);
}

TEST_CASE("rank tolerance drops tiny singular values") {
  DenseMatrix D(3, 3);
  D.at(0, 0) = 1.0;
  D.at(1, 1) = 0.5;
  D.at(2, 2) = 1e-16;  // below 1e-14 * sigma_1
  SvdResult s = svd(D);
  CHECK(s.rank == 2u);
}

TEST_CASE("spectrum gap picker finds the cliff, or keeps full rank") {
  SvdResult s;
  s.sigma = {10.0, 9.0, 1e-6, 1e-7};
  s.rank = 4;
  CHECK(pick_alpha_by_spectrum_gap(s) == 2u);

  SvdResult flat;
  flat.sigma = {3.0, 2.5, 2.0, 1.8};
  flat.rank = 4;
  CHECK(pick_alpha_by_spectrum_gap(flat) == 4u);

  SvdResult one;
  one.sigma = {2.0};
  one.rank = 1;
  CHECK(pick_alpha_by_spectrum_gap(one) == 1u);
}

TEST_CASE("matrix helpers: A^T B and transposed matvec") {
  DenseMatrix A(3, 2);
  A.at(0, 0) = 1.0; A.at(0, 1) = 2.0;
  A.at(1, 0) = 3.0; A.at(1, 1) = 4.0;
  A.at(2, 0) = 5.0; A.at(2, 1) = 6.0;
  DenseMatrix G = matmul_at_b(A, A);
  CHECK(G.at(0, 0) == doctest::Approx(35.0));
  CHECK(G.at(0, 1) == doctest::Approx(44.0));
  CHECK(G.at(1, 0) == doctest::Approx(44.0));
  CHECK(G.at(1, 1) == doctest::Approx(56.0));

  const std::vector<double> y = matvec_transposed(A, {1.0, 1.0, 1.0});
  CHECK(y[0] == doctest::Approx(9.0));
  CHECK(y[1] == doctest::Approx(12.0));
}
