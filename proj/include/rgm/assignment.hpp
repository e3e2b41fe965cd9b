#pragma once

#include "rgm/core.hpp"

#include <vector>

namespace rgm {

/// A 0/1 matrix with one entry per row and at most one per column.
///
/// Stored as the matched column of each row; the dense form is produced on
/// demand. Construction validates the invariants, so any live Assignment is a
/// member of the feasible set of the matching problem.
class Assignment {
 public:
  Assignment() = default;

  static Assignment from_columns(std::vector<Eigen::Index> columns, Eigen::Index cols);
  static Assignment from_matrix(const Matrix& y);
  static Assignment identity(Eigen::Index n);

  Eigen::Index rows() const { return static_cast<Eigen::Index>(columns_.size()); }
  Eigen::Index cols() const { return cols_; }
  Eigen::Index operator[](Eigen::Index row) const { return columns_[static_cast<std::size_t>(row)]; }
  const std::vector<Eigen::Index>& columns() const { return columns_; }

  Matrix matrix() const;

  /// Sum of s over matched entries, i.e. tr(S Y^T).
  double score(const Matrix& s) const;

  bool operator==(const Assignment&) const = default;

 private:
  std::vector<Eigen::Index> columns_;
  Eigen::Index cols_ = 0;
};

enum class Sense { maximize, minimize };

/// Optimal linear assignment of the rows of an n x m matrix (n <= m).
///
/// Among optimal assignments the lexicographically smallest column sequence
/// is returned, so ties resolve to the lowest row, then lowest column.
Assignment hungarian(const Matrix& similarity, Sense sense = Sense::maximize);

/// Entropic relaxation: alternately normalizes rows and columns of
/// exp(S / epsilon) in the log domain. Stops once both marginal residuals fall
/// below 1e-9 or after `iterations` sweeps.
Matrix sinkhorn(const Matrix& similarity, int iterations, double epsilon);

/// tr(Y^T F_A Y F_B) + tr(S^T Y).
double qap_objective(const Assignment& y, const Matrix& f_a, const Matrix& f_b, const Matrix& s);

/// max_{Y} tr(S Y^T) - tr(S Y_gt^T), inner max solved exactly.
double structured_linear_loss(const Matrix& s, const Assignment& y_gt);

/// Log-sum-exp smoothing of the structured loss over the row-stochastic relaxation.
double smoothed_linear_loss(const Matrix& s, const Assignment& y_gt, double tau);

/// Fraction of rows whose predicted column equals the ground-truth column.
double matching_accuracy(const Assignment& y_pred, const Assignment& y_gt);

}  // namespace rgm
