#pragma once

#include "rgm/core.hpp"

namespace rgm {

/// How teacher similarities are turned into node confidences.
enum class ConfidenceMode {
  softmax,  ///< diagonal of the row/column softmax of S_hat at temperature tau
  ratio,    ///< literal ratio of raw similarities to their row/column sums
};

struct LossConfig {
  double tau = 0.07;
  double alpha = 0.4;
  double within_weight = 1.0;
  double cross_weight = 1.0;
  bool normalize_consistency = false;  ///< divide consistency terms by n^2
  ConfidenceMode confidence = ConfidenceMode::softmax;

  void validate() const;
};

/// One loss term and its gradient with respect to both embedding matrices.
struct LossTerm {
  double value = 0.0;
  Matrix grad_pa;
  Matrix grad_pb;
};

struct LossReport {
  double total = 0.0;
  double infonce = 0.0;  ///< contrastive part (robust when distillation is on)
  double within = 0.0;   ///< within-graph consistency (edge-weighted in the robust loss)
  double cross = 0.0;    ///< cross-graph consistency (edge-weighted in the robust loss)
  Matrix grad_pa;
  Matrix grad_pb;
};

/// Row-wise cross-entropy with mean reduction: -(1/n) sum_ij target_ij log softmax(s / tau)_ij.
double cross_entropy_rows(const Matrix& target, const Matrix& s, double tau);

// Symmetric InfoNCE over S = P_A P_B^T and its transpose.
double infonce(const Matrix& p_a, const Matrix& p_b, double tau);
LossTerm infonce_term(const Matrix& p_a, const Matrix& p_b, double tau);

// ||P_A P_A^T - P_B P_B^T||_F^2
double within_consistency(const Matrix& p_a, const Matrix& p_b, bool normalize = false);
LossTerm within_term(const Matrix& p_a, const Matrix& p_b, bool normalize = false);

// ||P_A P_B^T - P_B P_A^T||_F^2
double cross_consistency(const Matrix& p_a, const Matrix& p_b, bool normalize = false);
LossTerm cross_term(const Matrix& p_a, const Matrix& p_b, bool normalize = false);

/// InfoNCE plus both graph consistency regularizers. Ignores config.alpha.
LossReport quadratic_loss(const Matrix& p_a, const Matrix& p_b, const LossConfig& config);

/// Per-node confidence from the teacher's aligned embeddings. In softmax mode
/// every entry is in (0, 1).
Vector node_confidence(const Matrix& p_hat_a, const Matrix& p_hat_b, double tau,
                       ConfidenceMode mode = ConfidenceMode::softmax);

/// W = s (x) s.
Matrix edge_confidence(const Vector& s);

/// (1 - alpha) * hard InfoNCE + alpha * cross-entropy against the teacher's
/// soft alignment, in both directions. Teacher embeddings are constants.
double robust_infonce(const Matrix& p_a, const Matrix& p_b, const Matrix& p_hat_a, const Matrix& p_hat_b,
                      double tau, double alpha);
LossTerm robust_infonce_term(const Matrix& p_a, const Matrix& p_b, const Matrix& p_hat_a, const Matrix& p_hat_b,
                             double tau, double alpha);

/// Edge-confidence weighted within- and cross-graph consistency.
double robust_graph(const Matrix& p_a, const Matrix& p_b, const Matrix& w, bool normalize = false);
LossTerm robust_graph_term(const Matrix& p_a, const Matrix& p_b, const Matrix& w, bool normalize = false);

/// Full robust objective: robust InfoNCE plus confidence-weighted graph
/// consistency, with W derived from the teacher.
LossReport robust_quadratic(const Matrix& p_a, const Matrix& p_b, const Matrix& p_hat_a, const Matrix& p_hat_b,
                            const LossConfig& config);

/// Same, with the node confidences supplied by the caller.
LossReport robust_quadratic(const Matrix& p_a, const Matrix& p_b, const Matrix& p_hat_a, const Matrix& p_hat_b,
                            const LossConfig& config, const Vector& confidence);

}  // namespace rgm
