#include <doctest.h>

#include <cmath>

#include "odec/matrix.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace odec;
using testutil::random_matrix;

namespace {

Matrix reconstruct(const SvdResult& s) {
  return s.left * s.singular.asDiagonal() * s.right.transpose();
}

}  // namespace

TEST_SUITE("matcore") {

TEST_CASE("svd of identity") {
  const SvdResult s = svd(Matrix::Identity(3, 3));
  for (Index i = 0; i < 3; ++i) CHECK(s.singular(i) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((reconstruct(s) - Matrix::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("svd of diag(3,2,1) is axis aligned") {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 3;
  d(1, 1) = 2;
  d(2, 2) = 1;
  const SvdResult s = svd(d);
  CHECK(s.singular(0) == doctest::Approx(3.0));
  CHECK(s.singular(1) == doctest::Approx(2.0));
  CHECK(s.singular(2) == doctest::Approx(1.0));
  // axis aligned up to sign; sign convention makes them +1
  for (Index j = 0; j < 3; ++j) {
    CHECK(std::abs(s.left(j, j)) == doctest::Approx(1.0));
    CHECK(s.left(j, j) > 0.0);
  }
}

TEST_CASE("svd reconstruction vs Gram-matrix eigendecomposition oracle") {
  Rng rng(101);
  const Matrix m = random_matrix(rng, 6, 4);
  const SvdResult s = svd(m);

  CHECK((reconstruct(s) - m).norm() <= 1e-8 * s.singular(0));
  CHECK((s.left.transpose() * s.left - Matrix::Identity(4, 4)).norm() < 1e-10);
  CHECK((s.right.transpose() * s.right - Matrix::Identity(4, 4)).norm() < 1e-10);

  const oracles::GramSvd g = oracles::gram_svd(m);
  for (Index i = 0; i < 4; ++i)
    CHECK(s.singular(i) == doctest::Approx(g.singular(i)).epsilon(1e-8));
  const Matrix oracle_rec = g.left * g.singular.asDiagonal() * g.right.transpose();
  CHECK((oracle_rec - m).norm() <= 1e-7 * g.singular(0));
}

TEST_CASE("svd rejects non-finite input") {
  Matrix m = Matrix::Ones(2, 2);
  m(0, 1) = std::nan("");
  CHECK_THROWS_WITH_AS(svd(m), doctest::Contains("non-finite"), Error);
}

TEST_CASE("svd singular values are nonincreasing") {
  Rng rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    const SvdResult s = svd(random_matrix(rng, 8, 5));
    for (Index i = 1; i < s.singular.size(); ++i) CHECK(s.singular(i) <= s.singular(i - 1));
  }
}

TEST_CASE("truncate_svd rank-1 exact") {
  Rng rng(3);
  const Vector u = testutil::random_vector(rng, 5);
  const Vector v = testutil::random_vector(rng, 4);
  const Matrix m = u * v.transpose();
  const SvdResult t = truncate_svd(svd(m), 1);
  CHECK((reconstruct(t) - m).norm() < 1e-10 * m.norm());
}

TEST_CASE("truncate_svd identity 4x4 at k=2 leaves sqrt(2)") {
  const SvdResult t = truncate_svd(svd(Matrix::Identity(4, 4)), 2);
  const double err = (reconstruct(t) - Matrix::Identity(4, 4)).norm();
  CHECK(err == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("truncate_svd diag(3,2,1) at k=2 leaves error 1") {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 3;
  d(1, 1) = 2;
  d(2, 2) = 1;
  const SvdResult t = truncate_svd(svd(d), 2);
  CHECK((reconstruct(t) - d).norm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("truncate_svd rejects out-of-range k") {
  const SvdResult s = svd(Matrix::Identity(3, 3));
  CHECK_THROWS_AS(truncate_svd(s, 0), Error);
  CHECK_THROWS_AS(truncate_svd(s, 4), Error);
}

TEST_CASE("Eckart-Young equality on random matrices") {
  Rng rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix m = random_matrix(rng, 9, 7);
    const SvdResult s = svd(m);
    for (Index k = 1; k <= 7; k += 3) {
      const SvdResult t = truncate_svd(s, k);
      double tail = 0.0;
      for (Index i = k; i < s.singular.size(); ++i) tail += s.singular(i) * s.singular(i);
      CHECK((reconstruct(t) - m).norm() == doctest::Approx(std::sqrt(tail)).epsilon(1e-8));
    }
  }
}

TEST_CASE("pseudo_inverse of identity") {
  CHECK((pseudo_inverse(Matrix::Identity(2, 2)) - Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("pseudo_inverse of a column vector") {
  Matrix col(2, 1);
  col << 1, 1;
  const Matrix p = pseudo_inverse(col);
  CHECK(p.rows() == 1);
  CHECK(p.cols() == 2);
  CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("pseudo_inverse matches the normal-equations oracle on full column rank") {
  Rng rng(23);
  const Matrix m = random_matrix(rng, 5, 3);
  const Matrix p = pseudo_inverse(m);
  // oracle: (m^T m)^{-1} m^T column by column via Gaussian elimination
  const Matrix gram = m.transpose() * m;
  Matrix oracle(3, 5);
  for (Index c = 0; c < 5; ++c)
    oracle.col(c) = oracles::gauss_solve(gram, m.transpose().col(c));
  CHECK((p - oracle).norm() < 1e-8);
}

TEST_CASE("pseudo_inverse satisfies the four Moore-Penrose identities") {
  Rng rng(29);
  for (Index rows : {4, 6}) {
    for (Index cols : {4, 3}) {
      const Matrix m = random_matrix(rng, rows, cols);
      const Matrix p = pseudo_inverse(m);
      CHECK((m * p * m - m).norm() < 1e-8);
      CHECK((p * m * p - p).norm() < 1e-8);
      CHECK(((m * p) - (m * p).transpose()).norm() < 1e-8);
      CHECK(((p * m) - (p * m).transpose()).norm() < 1e-8);
    }
  }
}

TEST_CASE("pseudo_inverse equals inverse for square invertible matrices") {
  Rng rng(31);
  const Matrix m = random_matrix(rng, 5, 5) + 3.0 * Matrix::Identity(5, 5);
  CHECK((pseudo_inverse(m) * m - Matrix::Identity(5, 5)).norm() < 1e-8);
}

TEST_CASE("solve_linear identity and diagonal") {
  Matrix b(2, 1);
  b << 2, 8;
  CHECK((solve_linear(Matrix::Identity(2, 2), b) - b).norm() < 1e-14);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 4;
  const Matrix x = solve_linear(d, b);
  CHECK(x(0, 0) == doctest::Approx(1.0));
  CHECK(x(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("solve_linear residual on a random well-conditioned system") {
  Rng rng(37);
  const Matrix a = random_matrix(rng, 5, 5) + 4.0 * Matrix::Identity(5, 5);
  const Matrix b = random_matrix(rng, 5, 2);
  const Matrix x = solve_linear(a, b);
  CHECK((a * x - b).norm() <= 1e-10 * b.norm());
}

TEST_CASE("solve_linear rejects singular systems naming DEIM") {
  Matrix a = Matrix::Ones(3, 3);
  Matrix b = Matrix::Ones(3, 1);
  CHECK_THROWS_WITH_AS(solve_linear(a, b), doctest::Contains("DEIM"), Error);
}

TEST_CASE("numerical_rank") {
  Rng rng(41);
  const Matrix m = random_matrix(rng, 6, 3);
  CHECK(numerical_rank(m) == 3);
  const Matrix low = m * m.transpose();  // 6x6, rank 3
  CHECK(numerical_rank(low) == 3);
  CHECK(numerical_rank(Matrix::Zero(4, 4)) == 0);
}

}  // TEST_SUITE
