#include "helpers.hpp"

#include <doctest.h>

#include <cstring>
#include <limits>

using namespace rgm;
using testing::gaussian;

TEST_CASE("matmul") {
  Matrix a(2, 2), b(2, 2);
  a << 1, 0, 0, 1;
  b << 2, 3, 4, 5;
  CHECK(matmul(a, b) == b);
  CHECK(matmul(Matrix::Identity(2, 2), b) == b);

  Rng rng(1);
  const Matrix x = gaussian(rng, 4, 3), y = gaussian(rng, 3, 5);
  Matrix ref = Matrix::Zero(4, 5);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 3; ++k) ref(i, j) += x(i, k) * y(k, j);
  const Matrix got = matmul(x, y);
  CHECK(got.rows() == 4);
  CHECK(got.cols() == 5);
  CHECK(testing::max_abs_diff(got, ref) < 1e-12);

  CHECK_THROWS_AS(matmul(x, x), ContractError);
}

TEST_CASE("row_softmax") {
  Matrix s(1, 2);
  s << 0, 0;
  CHECK(row_softmax(s, 1.0)(0, 0) == doctest::Approx(0.5));
  s << 1, 0;
  const Matrix p = row_softmax(s, 1.0);
  CHECK(p(0, 0) == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1.0)).epsilon(1e-14));
  CHECK(p(0, 0) == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(p(0, 1) == doctest::Approx(0.2689).epsilon(1e-4));

  s << 1000, 0;
  const Matrix q = row_softmax(s, 0.07);
  CHECK(all_finite(q));
  CHECK(std::abs(q(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(q(0, 1)) < 1e-12);

  CHECK_THROWS_AS(row_softmax(s, 0.0), ContractError);
  CHECK_THROWS_AS(row_softmax(s, -1.0), ContractError);

  Rng rng(2);
  for (int k = 0; k < 50; ++k) {
    const Matrix r = row_softmax(gaussian(rng, 5, 7) * 20.0, 0.07);
    for (Eigen::Index i = 0; i < r.rows(); ++i) CHECK(std::abs(r.row(i).sum() - 1.0) < 1e-9);
    CHECK(r.minCoeff() >= 0.0);
    CHECK(r.maxCoeff() <= 1.0);
  }
}

TEST_CASE("logsumexp_rows") {
  Matrix c = Matrix::Constant(1, 4, 2.5);
  CHECK(logsumexp_rows(c, 0.3)(0) == doctest::Approx(2.5 + 0.3 * std::log(4.0)).epsilon(1e-14));

  Matrix s(1, 2);
  s << 1, 0;
  CHECK(logsumexp_rows(s, 1.0)(0) == doctest::Approx(std::log(std::exp(1.0) + 1.0)).epsilon(1e-14));
  CHECK(logsumexp_rows(s, 1.0)(0) == doctest::Approx(1.3133).epsilon(1e-4));

  Matrix t(1, 3);
  t << 3, 1, 2;
  CHECK(std::abs(logsumexp_rows(t, 1e-4)(0) - 3.0) < 1e-3);

  Matrix big(1, 2);
  big << 1e4, -1e4;
  CHECK(logsumexp_rows(big, 0.07)(0) == doctest::Approx(1e4));

  CHECK_THROWS_AS(logsumexp_rows(s, 0.0), ContractError);

  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    const Matrix m = gaussian(rng, 4, 6);
    const double tau = rng.uniform(0.01, 2.0);
    const Vector l = logsumexp_rows(m, tau);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double mx = m.row(i).maxCoeff();
      CHECK(l(i) >= mx);
      CHECK(l(i) <= mx + tau * std::log(6.0) + 1e-12);
    }
  }
}

TEST_CASE("log_row_softmax agrees with log of row_softmax") {
  Rng rng(4);
  const Matrix m = gaussian(rng, 5, 5);
  const Matrix a = log_row_softmax(m, 0.5);
  const Matrix b = row_softmax(m, 0.5).array().log().matrix();
  CHECK(testing::max_abs_diff(a, b) < 1e-12);
}

TEST_CASE("frobenius_sq") {
  CHECK(frobenius_sq(Matrix::Zero(3, 3)) == 0.0);
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  CHECK(frobenius_sq(a) == 30.0);

  Rng rng(5);
  const Matrix r = gaussian(rng, 5, 5);
  double ref = 0.0;
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = 0; j < 5; ++j) ref += r(i, j) * r(i, j);
  CHECK(std::abs(frobenius_sq(r) - ref) < 1e-12);
  CHECK(frobenius_sq(r) == doctest::Approx((r.transpose() * r).trace()).epsilon(1e-9));
}

TEST_CASE("outer") {
  Vector u(2), v(2);
  u << 1, 1;
  CHECK(outer(u, u) == Matrix::Ones(2, 2));
  u << 1, 0;
  v << 0, 1;
  Matrix e(2, 2);
  e << 0, 1, 0, 0;
  CHECK(outer(u, v) == e);
  u << 0.5, 0.8;
  e << 0.25, 0.4, 0.4, 0.64;
  CHECK(testing::max_abs_diff(outer(u, u), e) < 1e-15);

  Vector w(3);
  w << 1, 2, 3;
  CHECK(outer(u, w).rows() == 2);
  CHECK(outer(u, w).cols() == 3);
}

TEST_CASE("hadamard") {
  Rng rng(6);
  const Matrix a = gaussian(rng, 3, 4), b = gaussian(rng, 3, 4);
  CHECK(hadamard(a, Matrix::Ones(3, 4)) == a);
  CHECK(hadamard(a, Matrix::Zero(3, 4)) == Matrix::Zero(3, 4));
  const Matrix h = hadamard(a, b);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) CHECK(std::abs(h(i, j) - a(i, j) * b(i, j)) < 1e-15);
  CHECK(testing::max_abs_diff(hadamard(Matrix(2.5 * a), b), 2.5 * h) < 1e-12);
  CHECK_THROWS_AS(hadamard(a, Matrix::Ones(4, 3)), ContractError);
}

TEST_CASE("l2_normalize_rows") {
  Matrix a(1, 2);
  a << 3, 4;
  const Matrix n = l2_normalize_rows(a);
  CHECK(n(0, 0) == doctest::Approx(0.6));
  CHECK(n(0, 1) == doctest::Approx(0.8));
  CHECK(testing::max_abs_diff(l2_normalize_rows(n), n) < 1e-12);

  Rng rng(7);
  const Matrix r = l2_normalize_rows(gaussian(rng, 6, 8));
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(std::abs(r.row(i).norm() - 1.0) < 1e-9);

  Matrix z = Matrix::Ones(2, 3);
  z.row(1).setZero();
  CHECK_THROWS_AS(l2_normalize_rows(z), ContractError);
}

TEST_CASE("operations are deterministic") {
  Rng rng(8);
  const Matrix m = gaussian(rng, 6, 6);
  const Matrix a = row_softmax(m, 0.07), b = row_softmax(m, 0.07);
  CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * 36) == 0);
  CHECK(logsumexp_rows(m, 0.3) == logsumexp_rows(m, 0.3));
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a = Rng::stream(5, 1), b = Rng::stream(5, 1), c = Rng::stream(5, 2);
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());

  Rng r(9);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
  for (int i = 0; i < 1000; ++i) {
    const auto k = r.below(7);
    CHECK(k < 7);
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}
