#include "rgm/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rgm {

Assignment Assignment::from_columns(std::vector<Eigen::Index> columns, Eigen::Index cols) {
  const auto n = static_cast<Eigen::Index>(columns.size());
  require(n <= cols, "Assignment: more rows than columns");
  std::vector<bool> used(static_cast<std::size_t>(cols), false);
  for (const auto c : columns) {
    require(c >= 0 && c < cols, "Assignment: column index out of range");
    require(!used[static_cast<std::size_t>(c)], "Assignment: column matched twice");
    used[static_cast<std::size_t>(c)] = true;
  }
  Assignment a;
  a.columns_ = std::move(columns);
  a.cols_ = cols;
  return a;
}

Assignment Assignment::from_matrix(const Matrix& y) {
  std::vector<Eigen::Index> columns;
  columns.reserve(static_cast<std::size_t>(y.rows()));
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    Eigen::Index hit = -1;
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      const double v = y(i, j);
      require(v == 0.0 || v == 1.0, "Assignment: entries must be 0 or 1");
      if (v == 1.0) {
        require(hit < 0, "Assignment: row sums to more than one");
        hit = j;
      }
    }
    require(hit >= 0, "Assignment: row sums to zero");
    columns.push_back(hit);
  }
  return from_columns(std::move(columns), y.cols());
}

Assignment Assignment::identity(Eigen::Index n) {
  std::vector<Eigen::Index> columns(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) columns[static_cast<std::size_t>(i)] = i;
  return from_columns(std::move(columns), n);
}

Matrix Assignment::matrix() const {
  Matrix y = Matrix::Zero(rows(), cols_);
  for (Eigen::Index i = 0; i < rows(); ++i) y(i, (*this)[i]) = 1.0;
  return y;
}

double Assignment::score(const Matrix& s) const {
  require(s.rows() == rows() && s.cols() == cols_, "Assignment::score: shape mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < rows(); ++i) total += s(i, (*this)[i]);
  return total;
}

namespace {

// Shortest augmenting path with potentials, minimizing cost over n <= m.
// Returns the matched column of each row.
std::vector<Eigen::Index> min_cost_assignment(const Matrix& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  const auto m = static_cast<std::size_t>(cost.cols());
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; index 0 is the virtual source row/column.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Eigen::Index> columns(n, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) columns[p[j] - 1] = static_cast<Eigen::Index>(j - 1);
  }
  return columns;
}

double assignment_cost(const Matrix& cost, const std::vector<Eigen::Index>& columns) {
  double total = 0.0;
  for (std::size_t i = 0; i < columns.size(); ++i) total += cost(static_cast<Eigen::Index>(i), columns[i]);
  return total;
}

// Optimal cost of the subproblem restricted to the given rows and columns.
double restricted_optimum(const Matrix& cost, const std::vector<Eigen::Index>& rows,
                          const std::vector<Eigen::Index>& cols) {
  if (rows.empty()) return 0.0;
  Matrix sub(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b)
      sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = cost(rows[a], cols[b]);
  return assignment_cost(sub, min_cost_assignment(sub));
}

}  // namespace

Assignment hungarian(const Matrix& similarity, Sense sense) {
  const Eigen::Index n = similarity.rows();
  const Eigen::Index m = similarity.cols();
  require(n <= m, "hungarian: requires rows <= cols");
  require(similarity.allFinite(), "hungarian: non-finite similarity");
  if (n == 0) return Assignment::from_columns({}, m);

  const Matrix cost = sense == Sense::maximize ? Matrix(-similarity) : similarity;
  std::vector<Eigen::Index> best = min_cost_assignment(cost);
  const double optimum = assignment_cost(cost, best);
  const double tol = 1e-12 * std::max(1.0, cost.cwiseAbs().maxCoeff() * static_cast<double>(n));

  // Lexicographic refinement: fix each row to the lowest column that still
  // admits an optimal completion.
  std::vector<Eigen::Index> fixed;
  std::vector<bool> col_used(static_cast<std::size_t>(m), false);
  double fixed_cost = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<Eigen::Index> rest_rows;
    for (Eigen::Index r = i + 1; r < n; ++r) rest_rows.push_back(r);
    bool placed = false;
    for (Eigen::Index j = 0; j < m && !placed; ++j) {
      if (col_used[static_cast<std::size_t>(j)]) continue;
      std::vector<Eigen::Index> rest_cols;
      for (Eigen::Index c = 0; c < m; ++c)
        if (!col_used[static_cast<std::size_t>(c)] && c != j) rest_cols.push_back(c);
      const double total = fixed_cost + cost(i, j) + restricted_optimum(cost, rest_rows, rest_cols);
      if (total <= optimum + tol) {
        fixed.push_back(j);
        col_used[static_cast<std::size_t>(j)] = true;
        fixed_cost += cost(i, j);
        placed = true;
      }
    }
    if (!placed) return Assignment::from_columns(std::move(best), m);
  }
  return Assignment::from_columns(std::move(fixed), m);
}

Matrix sinkhorn(const Matrix& similarity, int iterations, double epsilon) {
  require(similarity.rows() == similarity.cols(), "sinkhorn: input must be square");
  require(iterations >= 1, "sinkhorn: iterations must be >= 1");
  require(epsilon > 0.0, "sinkhorn: epsilon must be positive");
  const Eigen::Index n = similarity.rows();
  const Matrix log_k = similarity / epsilon;
  Vector log_u = Vector::Zero(n);
  Vector log_v = Vector::Zero(n);

  auto plan = [&] {
    Matrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) out(i, j) = std::exp(log_k(i, j) + log_u(i) + log_v(j));
    return out;
  };
  auto lse = [](const auto& x) {
    const double mx = x.maxCoeff();
    return mx + std::log((x.array() - mx).exp().sum());
  };

  for (int it = 0; it < iterations; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) log_u(i) = -lse((log_k.row(i).transpose() + log_v).eval());
    for (Eigen::Index j = 0; j < n; ++j) log_v(j) = -lse((log_k.col(j) + log_u).eval());
    const Matrix p = plan();
    const double row_res = (p.rowwise().sum().array() - 1.0).abs().maxCoeff();
    const double col_res = (p.colwise().sum().array() - 1.0).abs().maxCoeff();
    if (row_res < 1e-9 && col_res < 1e-9) break;
  }
  return plan();
}

double qap_objective(const Assignment& y, const Matrix& f_a, const Matrix& f_b, const Matrix& s) {
  const Eigen::Index n = y.rows();
  const Eigen::Index m = y.cols();
  require(f_a.rows() == n && f_a.cols() == n, "qap_objective: F_A must be n x n");
  require(f_b.rows() == m && f_b.cols() == m, "qap_objective: F_B must be m x m");
  require(s.rows() == n && s.cols() == m, "qap_objective: S must be n x m");
  const Matrix ym = y.matrix();
  return (ym.transpose() * f_a * ym * f_b).trace() + (s.transpose() * ym).trace();
}

double structured_linear_loss(const Matrix& s, const Assignment& y_gt) {
  require(s.rows() == y_gt.rows() && s.cols() == y_gt.cols(), "structured_linear_loss: shape mismatch");
  const Assignment best = hungarian(s);
  return std::max(0.0, best.score(s) - y_gt.score(s));
}

double smoothed_linear_loss(const Matrix& s, const Assignment& y_gt, double tau) {
  require(tau > 0.0, "smoothed_linear_loss: tau must be positive");
  require(s.rows() == y_gt.rows() && s.cols() == y_gt.cols(), "smoothed_linear_loss: shape mismatch");
  const Matrix log_p = log_row_softmax(s, tau);
  double total = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) total -= tau * log_p(i, y_gt[i]);
  return total;
}

double matching_accuracy(const Assignment& y_pred, const Assignment& y_gt) {
  require(y_pred.rows() == y_gt.rows() && y_pred.cols() == y_gt.cols(), "matching_accuracy: shape mismatch");
  require(y_gt.rows() > 0, "matching_accuracy: empty assignment");
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < y_gt.rows(); ++i) hits += y_pred[i] == y_gt[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(y_gt.rows());
}

}  // namespace rgm
