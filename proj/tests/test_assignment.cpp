#include "rgm/assignment.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>

using namespace rgm;
using testing::gaussian;

namespace {

void check_invariants(const Assignment& y) {
  const Matrix m = y.matrix();
  REQUIRE(m.rows() <= m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) CHECK(m.row(i).sum() == 1.0);
  for (Eigen::Index j = 0; j < m.cols(); ++j) CHECK(m.col(j).sum() <= 1.0);
  CHECK((m.array() * (m.array() - 1.0)).abs().maxCoeff() == 0.0);
}

// Exhaustive search over injective row -> column maps, n <= m.
std::pair<double, std::vector<Eigen::Index>> brute_force(const Matrix& s) {
  const Eigen::Index n = s.rows(), m = s.cols();
  std::vector<Eigen::Index> cols(static_cast<std::size_t>(m));
  std::iota(cols.begin(), cols.end(), 0);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> arg;
  do {
    double v = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) v += s(i, cols[static_cast<std::size_t>(i)]);
    if (v > best) {
      best = v;
      arg.assign(cols.begin(), cols.begin() + n);
    }
  } while (std::next_permutation(cols.begin(), cols.end()));
  return {best, arg};
}

}  // namespace

TEST_CASE("assignment construction validates") {
  CHECK_NOTHROW(Assignment::from_columns({2, 0}, 3));
  CHECK_THROWS_AS(Assignment::from_columns({1, 1}, 3), ContractError);
  CHECK_THROWS_AS(Assignment::from_columns({0, 3}, 3), ContractError);
  CHECK_THROWS_AS(Assignment::from_columns({0, 1, 2}, 2), ContractError);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(Assignment::from_matrix(bad), ContractError);
  const Assignment y = Assignment::from_columns({2, 0}, 3);
  CHECK(Assignment::from_matrix(y.matrix()) == y);
  check_invariants(y);
}

TEST_CASE("hungarian examples") {
  CHECK(hungarian(Matrix::Identity(3, 3)) == Assignment::identity(3));

  Matrix c(3, 3);
  c << 1, 2, 3, 2, 4, 6, 3, 6, 9;
  const Assignment y = hungarian(c, Sense::minimize);
  CHECK(y.columns() == std::vector<Eigen::Index>{2, 1, 0});
  CHECK(y.score(c) == 10.0);

  CHECK_THROWS_AS(hungarian(Matrix::Zero(3, 2)), ContractError);
}

TEST_CASE("hungarian matches exhaustive search") {
  Rng rng(11);
  for (int k = 0; k < 200; ++k) {
    const Matrix s = gaussian(rng, 6, 6);
    const Assignment y = hungarian(s);
    check_invariants(y);
    CHECK(y.score(s) == brute_force(s).first);
  }
  for (Eigen::Index n = 2; n <= 7; ++n) {
    for (int k = 0; k < 20; ++k) {
      const Matrix s = gaussian(rng, n, n);
      CHECK(hungarian(s).score(s) == brute_force(s).first);
    }
  }
}

TEST_CASE("hungarian on rectangular inputs") {
  Rng rng(12);
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(4));
    const Eigen::Index m = n + static_cast<Eigen::Index>(rng.below(3));
    const Matrix s = gaussian(rng, n, m);
    const Assignment y = hungarian(s);
    check_invariants(y);
    CHECK(y.score(s) == doctest::Approx(brute_force(s).first).epsilon(1e-14));
  }
}

TEST_CASE("hungarian tie-break is lexicographic") {
  // Every permutation ties; the lowest column sequence wins.
  CHECK(hungarian(Matrix::Ones(4, 4)) == Assignment::identity(4));
  CHECK(hungarian(Matrix::Zero(3, 5)).columns() == std::vector<Eigen::Index>{0, 1, 2});

  Matrix s(3, 3);
  s << 1, 1, 0,
       1, 1, 0,
       0, 0, 1;
  CHECK(hungarian(s).columns() == std::vector<Eigen::Index>{0, 1, 2});

  // Integer matrices with many ties: the result is the first optimal
  // permutation in lexicographic order.
  Rng rng(13);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(4));
    Matrix t(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) t(i, j) = static_cast<double>(rng.below(3));
    CHECK(hungarian(t).columns() == brute_force(t).second);
  }
}

TEST_CASE("sinkhorn") {
  const Matrix p = sinkhorn(50.0 * Matrix::Identity(3, 3), 50, 1.0);
  CHECK(testing::max_abs_diff(p, Matrix::Identity(3, 3)) < 1e-6);

  const Matrix u = sinkhorn(Matrix::Constant(4, 4, 0.7), 10, 0.5);
  CHECK(testing::max_abs_diff(u, Matrix::Constant(4, 4, 0.25)) < 1e-12);

  Rng rng(14);
  for (int k = 0; k < 50; ++k) {
    const Matrix s = gaussian(rng, 5, 5);
    const Matrix q = sinkhorn(s, 100, 1.0);
    CHECK((q.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-6);
    CHECK((q.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-6);
    const Matrix shifted = sinkhorn((s.array() + 3.7).matrix(), 100, 1.0);
    CHECK(testing::max_abs_diff(q, shifted) < 1e-9);
  }

  CHECK_THROWS_AS(sinkhorn(Matrix::Zero(2, 3), 10, 1.0), ContractError);
  CHECK_THROWS_AS(sinkhorn(Matrix::Zero(2, 2), 0, 1.0), ContractError);
  CHECK_THROWS_AS(sinkhorn(Matrix::Zero(2, 2), 10, 0.0), ContractError);
}

TEST_CASE("qap objective") {
  const Matrix i3 = Matrix::Identity(3, 3);
  CHECK(qap_objective(Assignment::identity(3), i3, i3, i3) == 6.0);

  Rng rng(15);
  const Matrix fa = gaussian(rng, 3, 3), fb = gaussian(rng, 3, 3);
  CHECK(qap_objective(Assignment::identity(3), fa, fb, Matrix::Zero(3, 3)) ==
        doctest::Approx((fa * fb).trace()).epsilon(1e-12));

  for (int k = 0; k < 20; ++k) {
    // Edge affinities are symmetric.
    const Matrix ga = gaussian(rng, 4, 4), gb = gaussian(rng, 4, 4), s = gaussian(rng, 4, 4);
    const Matrix a = ga + ga.transpose(), b = gb + gb.transpose();
    std::vector<Eigen::Index> perm{0, 1, 2, 3};
    for (int r = 0; r < k; ++r) std::next_permutation(perm.begin(), perm.end());
    const Assignment y = Assignment::from_columns(perm, 4);
    const Matrix ym = y.matrix();
    double ref = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int kk = 0; kk < 4; ++kk)
          for (int l = 0; l < 4; ++l) ref += ym(i, kk) * a(i, j) * ym(j, l) * b(kk, l);
    for (int i = 0; i < 4; ++i)
      for (int kk = 0; kk < 4; ++kk) ref += s(i, kk) * ym(i, kk);
    CHECK(std::abs(qap_objective(y, a, b, s) - ref) < 1e-10);
  }

  CHECK_THROWS_AS(qap_objective(Assignment::identity(3), Matrix::Zero(2, 2), i3, i3), ContractError);
}

TEST_CASE("structured linear loss") {
  CHECK(structured_linear_loss(Matrix::Identity(3, 3), Assignment::identity(3)) == 0.0);
  Matrix s(2, 2);
  s << 0, 1, 1, 0;
  CHECK(structured_linear_loss(s, Assignment::identity(2)) == 2.0);

  Rng rng(16);
  for (int k = 0; k < 50; ++k) {
    const Matrix r = gaussian(rng, 5, 5);
    const auto [best, arg] = brute_force(r);
    CHECK(std::abs(structured_linear_loss(r, Assignment::from_columns(arg, 5))) < 1e-12);
    std::vector<Eigen::Index> perm{0, 1, 2, 3, 4};
    rng.shuffle(perm);
    CHECK(structured_linear_loss(r, Assignment::from_columns(perm, 5)) >= 0.0);
  }
}

TEST_CASE("smoothed linear loss") {
  for (Eigen::Index n = 1; n <= 5; ++n)
    CHECK(smoothed_linear_loss(Matrix::Zero(n, n), Assignment::identity(n), 1.0) ==
          doctest::Approx(static_cast<double>(n) * std::log(static_cast<double>(n))));

  const double v = smoothed_linear_loss(Matrix::Identity(2, 2), Assignment::identity(2), 1.0);
  CHECK(v == doctest::Approx(-2.0 + 2.0 * std::log(std::exp(1.0) + 1.0)).epsilon(1e-14));
  CHECK(v == doctest::Approx(0.6265).epsilon(1e-4));

  CHECK_THROWS_AS(smoothed_linear_loss(Matrix::Zero(2, 2), Assignment::identity(2), 0.0), ContractError);

  // Smoothing gap shrinks as tau goes to zero and stays within tau * n * log m.
  Rng rng(17);
  for (int k = 0; k < 30; ++k) {
    const Matrix s = gaussian(rng, 4, 4);
    std::vector<Eigen::Index> perm{0, 1, 2, 3};
    rng.shuffle(perm);
    const Assignment gt = Assignment::from_columns(perm, 4);
    const double hard = structured_linear_loss(s, gt);
    double last = std::numeric_limits<double>::infinity();
    for (double tau : {1.0, 0.1, 0.01}) {
      const double soft = smoothed_linear_loss(s, gt, tau);
      CHECK(soft >= hard - tau * 4.0 * std::log(4.0) - 1e-12);
      const double gap = std::abs(soft - hard);
      CHECK(gap <= last + 1e-12);
      last = gap;
    }
  }
}

TEST_CASE("smoothed loss with identity ground truth is scaled InfoNCE row term") {
  Rng rng(18);
  for (double tau : {0.07, 0.5, 1.0}) {
    for (int k = 0; k < 100; ++k) {
      const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(7));
      const Matrix s = gaussian(rng, n, n);
      // Row cross-entropy against the identity, written out per row.
      double ce = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double rest = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
          if (j != i) rest += std::exp((s(i, j) - s(i, i)) / tau);
        ce += std::log1p(rest);
      }
      ce /= static_cast<double>(n);
      const double lhs = smoothed_linear_loss(s, Assignment::identity(n), tau);
      const double rhs = static_cast<double>(n) * tau * ce;
      CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(rhs));
    }
  }
}

TEST_CASE("matching accuracy") {
  const Assignment a = Assignment::from_columns({0, 1, 2, 3, 4}, 5);
  CHECK(matching_accuracy(a, a) == 1.0);
  CHECK(matching_accuracy(Assignment::from_columns({1, 2, 3, 4, 0}, 5), a) == 0.0);
  CHECK(matching_accuracy(Assignment::from_columns({0, 1, 2, 4, 3}, 5), a) == doctest::Approx(0.6));
  CHECK_THROWS_AS(matching_accuracy(a, Assignment::identity(4)), ContractError);
}
