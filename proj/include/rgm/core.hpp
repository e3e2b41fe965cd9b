#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rgm {

// Row-major storage keeps rows (keypoints) contiguous.
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

/// Raised whenever a precondition on shapes or parameters is violated.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractError(what);
}

template <typename A, typename B>
void require_same_shape(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b, const char* where) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractError(std::string(where) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
  }
}

template <typename A, typename B>
auto matmul(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  using Scalar = typename A::Scalar;
  if (a.cols() != b.rows()) {
    throw ContractError("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                        std::to_string(b.rows()) + ")");
  }
  MatrixX<Scalar> out = a * b;
  return out;
}

/// Row-wise softmax of s / tau, max-subtracted.
template <typename Derived>
auto row_softmax(const Eigen::MatrixBase<Derived>& s, typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  require(tau > Scalar(0), "row_softmax: tau must be positive");
  MatrixX<Scalar> out(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const Scalar mx = s.row(i).maxCoeff();
    out.row(i) = ((s.row(i).array() - mx) / tau).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

/// Per row: tau * log sum_j exp(s_ij / tau), evaluated as max + tau * log sum exp((s - max) / tau).
template <typename Derived>
auto logsumexp_rows(const Eigen::MatrixBase<Derived>& s, typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  require(tau > Scalar(0), "logsumexp_rows: tau must be positive");
  VectorX<Scalar> out(s.rows());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    Eigen::Index arg = 0;
    const Scalar mx = s.row(i).maxCoeff(&arg);
    // The max term contributes exactly 1; log1p keeps the remainder accurate.
    Scalar rest = 0;
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      if (j != arg) rest += std::exp((s(i, j) - mx) / tau);
    out(i) = mx + tau * std::log1p(rest);
  }
  return out;
}

/// log softmax(s / tau) per row, accurate when one entry dominates its row.
template <typename Derived>
auto log_row_softmax(const Eigen::MatrixBase<Derived>& s, typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  require(tau > Scalar(0), "log_row_softmax: tau must be positive");
  MatrixX<Scalar> out(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    Eigen::Index arg = 0;
    const Scalar mx = s.row(i).maxCoeff(&arg);
    Scalar rest = 0;
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      if (j != arg) rest += std::exp((s(i, j) - mx) / tau);
    out.row(i) = (s.row(i).array() - mx) / tau - std::log1p(rest);
  }
  return out;
}

template <typename Derived>
typename Derived::Scalar frobenius_sq(const Eigen::MatrixBase<Derived>& a) {
  return a.squaredNorm();
}

template <typename U, typename V>
auto outer(const Eigen::MatrixBase<U>& u, const Eigen::MatrixBase<V>& v) {
  using Scalar = typename U::Scalar;
  MatrixX<Scalar> out = u.derived().reshaped() * v.derived().reshaped().transpose();
  return out;
}

template <typename A, typename B>
auto hadamard(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  using Scalar = typename A::Scalar;
  require_same_shape(a, b, "hadamard");
  MatrixX<Scalar> out = a.cwiseProduct(b);
  return out;
}

template <typename Derived>
auto l2_normalize_rows(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const Scalar norm = a.row(i).norm();
    require(norm > Scalar(0), "l2_normalize_rows: row " + std::to_string(i) + " is zero");
    out.row(i) = a.row(i) / norm;
  }
  return out;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& a) {
  return a.allFinite();
}

}  // namespace rgm
