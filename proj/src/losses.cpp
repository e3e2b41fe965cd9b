#include "rgm/losses.hpp"

#include <cmath>

namespace rgm {

void LossConfig::validate() const {
  require(tau > 0.0, "LossConfig: tau must be positive");
  require(alpha >= 0.0 && alpha <= 1.0, "LossConfig: alpha must be in [0, 1]");
  require(within_weight >= 0.0 && cross_weight >= 0.0, "LossConfig: weights must be non-negative");
}

namespace {

void check_pair(const Matrix& p_a, const Matrix& p_b, const char* where) {
  require_same_shape(p_a, p_b, where);
}

void check_contrastive(const Matrix& p_a, const Matrix& p_b, const char* where) {
  check_pair(p_a, p_b, where);
  require(p_a.rows() >= 2, std::string(where) + ": needs at least two aligned keypoints");
}

double consistency_scale(Eigen::Index n, bool normalize) {
  return normalize ? 1.0 / static_cast<double>(n * n) : 1.0;
}

// ||W o (P_A P_A^T - P_B P_B^T)||^2
LossTerm weighted_within(const Matrix& p_a, const Matrix& p_b, const Matrix& w, bool normalize) {
  const double scale = consistency_scale(p_a.rows(), normalize);
  const Matrix d = p_a * p_a.transpose() - p_b * p_b.transpose();
  const Matrix w2 = w.cwiseProduct(w);
  LossTerm t;
  t.value = scale * w2.cwiseProduct(d.cwiseProduct(d)).sum();
  const Matrix g = 2.0 * scale * w2.cwiseProduct(d);
  const Matrix sym = g + g.transpose();
  t.grad_pa = sym * p_a;
  t.grad_pb = -sym * p_b;
  return t;
}

// ||W o (S - S^T)||^2 with S = P_A P_B^T
LossTerm weighted_cross(const Matrix& p_a, const Matrix& p_b, const Matrix& w, bool normalize) {
  const double scale = consistency_scale(p_a.rows(), normalize);
  const Matrix s = p_a * p_b.transpose();
  const Matrix e = s - s.transpose();
  const Matrix w2 = w.cwiseProduct(w);
  LossTerm t;
  t.value = scale * w2.cwiseProduct(e.cwiseProduct(e)).sum();
  const Matrix h = 2.0 * scale * w2.cwiseProduct(e);
  const Matrix ds = h - h.transpose();
  t.grad_pa = ds * p_b;
  t.grad_pb = ds.transpose() * p_a;
  return t;
}

}  // namespace

double cross_entropy_rows(const Matrix& target, const Matrix& s, double tau) {
  require_same_shape(target, s, "cross_entropy_rows");
  require(s.rows() > 0, "cross_entropy_rows: empty input");
  return -target.cwiseProduct(log_row_softmax(s, tau)).sum() / static_cast<double>(s.rows());
}

double infonce(const Matrix& p_a, const Matrix& p_b, double tau) {
  return infonce_term(p_a, p_b, tau).value;
}

LossTerm infonce_term(const Matrix& p_a, const Matrix& p_b, double tau) {
  check_contrastive(p_a, p_b, "infonce");
  require(tau > 0.0, "infonce: tau must be positive");
  const Eigen::Index n = p_a.rows();
  const Matrix s = p_a * p_b.transpose();
  const Matrix st = s.transpose();
  const Matrix eye = Matrix::Identity(n, n);

  LossTerm t;
  t.value = cross_entropy_rows(eye, s, tau) + cross_entropy_rows(eye, st, tau);
  const double k = 1.0 / (static_cast<double>(n) * tau);
  const Matrix g_s = k * ((row_softmax(s, tau) - eye) + (row_softmax(st, tau) - eye).transpose());
  t.grad_pa = g_s * p_b;
  t.grad_pb = g_s.transpose() * p_a;
  return t;
}

double within_consistency(const Matrix& p_a, const Matrix& p_b, bool normalize) {
  return within_term(p_a, p_b, normalize).value;
}

LossTerm within_term(const Matrix& p_a, const Matrix& p_b, bool normalize) {
  check_pair(p_a, p_b, "within_consistency");
  const Eigen::Index n = p_a.rows();
  return weighted_within(p_a, p_b, Matrix::Ones(n, n), normalize);
}

double cross_consistency(const Matrix& p_a, const Matrix& p_b, bool normalize) {
  return cross_term(p_a, p_b, normalize).value;
}

LossTerm cross_term(const Matrix& p_a, const Matrix& p_b, bool normalize) {
  check_pair(p_a, p_b, "cross_consistency");
  const Eigen::Index n = p_a.rows();
  return weighted_cross(p_a, p_b, Matrix::Ones(n, n), normalize);
}

LossReport quadratic_loss(const Matrix& p_a, const Matrix& p_b, const LossConfig& config) {
  config.validate();
  const LossTerm nce = infonce_term(p_a, p_b, config.tau);
  const LossTerm within = within_term(p_a, p_b, config.normalize_consistency);
  const LossTerm cross = cross_term(p_a, p_b, config.normalize_consistency);

  LossReport r;
  r.infonce = nce.value;
  r.within = within.value;
  r.cross = cross.value;
  r.total = r.infonce + config.within_weight * r.within + config.cross_weight * r.cross;
  r.grad_pa = nce.grad_pa + config.within_weight * within.grad_pa + config.cross_weight * cross.grad_pa;
  r.grad_pb = nce.grad_pb + config.within_weight * within.grad_pb + config.cross_weight * cross.grad_pb;
  return r;
}

Vector node_confidence(const Matrix& p_hat_a, const Matrix& p_hat_b, double tau, ConfidenceMode mode) {
  check_pair(p_hat_a, p_hat_b, "node_confidence");
  const Matrix s = p_hat_a * p_hat_b.transpose();
  const Eigen::Index n = s.rows();
  Vector conf(n);
  if (mode == ConfidenceMode::softmax) {
    const Matrix by_row = row_softmax(s, tau);
    const Matrix by_col = row_softmax(Matrix(s.transpose()), tau);
    for (Eigen::Index i = 0; i < n; ++i) conf(i) = 0.5 * (by_row(i, i) + by_col(i, i));
  } else {
    const Vector row_sum = s.rowwise().sum();
    const Vector col_sum = s.colwise().sum().transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      require(row_sum(i) != 0.0 && col_sum(i) != 0.0, "node_confidence: zero similarity sum in ratio mode");
      conf(i) = 0.5 * (s(i, i) / row_sum(i) + s(i, i) / col_sum(i));
    }
  }
  return conf;
}

Matrix edge_confidence(const Vector& s) {
  return outer(s, s);
}

double robust_infonce(const Matrix& p_a, const Matrix& p_b, const Matrix& p_hat_a, const Matrix& p_hat_b,
                      double tau, double alpha) {
  return robust_infonce_term(p_a, p_b, p_hat_a, p_hat_b, tau, alpha).value;
}

LossTerm robust_infonce_term(const Matrix& p_a, const Matrix& p_b, const Matrix& p_hat_a, const Matrix& p_hat_b,
                             double tau, double alpha) {
  check_contrastive(p_a, p_b, "robust_infonce");
  require_same_shape(p_a, p_hat_a, "robust_infonce (teacher A)");
  require_same_shape(p_b, p_hat_b, "robust_infonce (teacher B)");
  require(tau > 0.0, "robust_infonce: tau must be positive");
  require(alpha >= 0.0 && alpha <= 1.0, "robust_infonce: alpha must be in [0, 1]");
  const Eigen::Index n = p_a.rows();
  const Matrix eye = Matrix::Identity(n, n);
  const Matrix s = p_a * p_b.transpose();
  const Matrix st = s.transpose();
  const Matrix s_hat = p_hat_a * p_hat_b.transpose();
  const Matrix target_row = row_softmax(s_hat, tau);
  const Matrix target_col = row_softmax(Matrix(s_hat.transpose()), tau);

  LossTerm t;
  const double hard = cross_entropy_rows(eye, s, tau) + cross_entropy_rows(eye, st, tau);
  const double soft = cross_entropy_rows(target_row, s, tau) + cross_entropy_rows(target_col, st, tau);
  t.value = (1.0 - alpha) * hard + alpha * soft;

  const Matrix mixed_row = (1.0 - alpha) * eye + alpha * target_row;
  const Matrix mixed_col = (1.0 - alpha) * eye + alpha * target_col;
  const double k = 1.0 / (static_cast<double>(n) * tau);
  const Matrix g_s = k * ((row_softmax(s, tau) - mixed_row) + (row_softmax(st, tau) - mixed_col).transpose());
  t.grad_pa = g_s * p_b;
  t.grad_pb = g_s.transpose() * p_a;
  return t;
}

double robust_graph(const Matrix& p_a, const Matrix& p_b, const Matrix& w, bool normalize) {
  return robust_graph_term(p_a, p_b, w, normalize).value;
}

LossTerm robust_graph_term(const Matrix& p_a, const Matrix& p_b, const Matrix& w, bool normalize) {
  check_pair(p_a, p_b, "robust_graph");
  require(w.rows() == p_a.rows() && w.cols() == p_a.rows(), "robust_graph: W must be n x n");
  require((w.array() >= 0.0).all(), "robust_graph: W must be non-negative");
  const LossTerm within = weighted_within(p_a, p_b, w, normalize);
  const LossTerm cross = weighted_cross(p_a, p_b, w, normalize);
  return {within.value + cross.value, within.grad_pa + cross.grad_pa, within.grad_pb + cross.grad_pb};
}

LossReport robust_quadratic(const Matrix& p_a, const Matrix& p_b, const Matrix& p_hat_a, const Matrix& p_hat_b,
                            const LossConfig& config) {
  config.validate();
  return robust_quadratic(p_a, p_b, p_hat_a, p_hat_b, config,
                          node_confidence(p_hat_a, p_hat_b, config.tau, config.confidence));
}

LossReport robust_quadratic(const Matrix& p_a, const Matrix& p_b, const Matrix& p_hat_a, const Matrix& p_hat_b,
                            const LossConfig& config, const Vector& confidence) {
  config.validate();
  require(confidence.size() == p_a.rows(), "robust_quadratic: confidence length must equal n");
  // Ratio-mode confidences are unbounded; clamp so W stays a valid weighting.
  const Matrix w = edge_confidence(confidence.cwiseMax(0.0).cwiseMin(1.0));
  const LossTerm nce = robust_infonce_term(p_a, p_b, p_hat_a, p_hat_b, config.tau, config.alpha);
  const LossTerm within = weighted_within(p_a, p_b, w, config.normalize_consistency);
  const LossTerm cross = weighted_cross(p_a, p_b, w, config.normalize_consistency);

  LossReport r;
  r.infonce = nce.value;
  r.within = within.value;
  r.cross = cross.value;
  r.total = r.infonce + config.within_weight * r.within + config.cross_weight * r.cross;
  r.grad_pa = nce.grad_pa + config.within_weight * within.grad_pa + config.cross_weight * cross.grad_pa;
  r.grad_pb = nce.grad_pb + config.within_weight * within.grad_pb + config.cross_weight * cross.grad_pb;
  return r;
}

}  // namespace rgm
