#pragma once

#include "rgm/encoder.hpp"
#include "rgm/losses.hpp"
#include "rgm/synthetic.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace rgm {

/// Which loss terms are active. Mirrors the rows of the ablation table.
enum class Ablation {
  full,            // robust InfoNCE + confidence-weighted graph consistency
  no_distill,      // InfoNCE + unweighted graph consistency
  no_graph,        // robust InfoNCE only
  infonce_only,
  infonce_within,
  infonce_cross,
};

std::string to_string(Ablation a);
Ablation parse_ablation(const std::string& name);
const std::vector<Ablation>& all_ablations();
bool uses_distillation(Ablation a);

struct TrainConfig {
  double learning_rate = 3e-4;
  Eigen::Index batch_size = 8;
  int epochs = 20;
  double momentum_t = 0.995;
  double alpha_max = 0.4;
  double tau = 0.07;
  std::uint64_t seed = 0;
  Ablation ablation = Ablation::full;

  std::vector<Eigen::Index> hidden = {64, 64};
  Eigen::Index embedding_dim = 32;
  double within_weight = 1.0;
  double cross_weight = 1.0;
  bool normalize_consistency = false;
  ConfidenceMode confidence = ConfidenceMode::softmax;
  bool eval_teacher = false;  // evaluate with the EMA teacher instead of the student

  void validate() const;
};

struct AdamMoments {
  Vector first;
  Vector second;
};

struct EpochSummary {
  int epoch = 0;  // 1-based
  double loss = 0.0;
  double infonce = 0.0;
  double within = 0.0;
  double cross = 0.0;
  double alpha = 0.0;  // alpha at the last step of the epoch
  double accuracy = std::numeric_limits<double>::quiet_NaN();  // NaN without an eval set
};

struct TrainState {
  EncoderParams student;
  EncoderParams teacher;
  AdamMoments moments;
  std::int64_t step = 0;
  std::vector<EpochSummary> history;
  std::vector<double> alpha_trace;  // alpha used at each step
  std::size_t skipped_pairs = 0;    // pairs with fewer than two keypoints

  const EncoderParams& inference_params(const TrainConfig& config) const {
    return config.eval_teacher ? teacher : student;
  }
};

/// Linear ramp from 0 to alpha_max over the first epoch, constant afterwards.
double alpha_schedule(std::int64_t step, std::int64_t steps_per_epoch, double alpha_max);

/// One bias-corrected Adam update (beta1 0.9, beta2 0.999, eps 1e-8).
/// `step` is the 1-based update count.
void adam_step(Vector& params, const Vector& grads, AdamMoments& moments, double lr, std::int64_t step);
void adam_step(EncoderParams& params, const EncoderGrads& grads, AdamMoments& moments, double lr, std::int64_t step);

/// Fresh student/teacher pair for inputs of width `input_dim`.
TrainState init_state(Eigen::Index input_dim, const TrainConfig& config);

/// Loss and gradients for one aligned pair under the configured ablation.
LossReport pair_loss(const Matrix& p_a, const Matrix& p_b, const Matrix& t_a, const Matrix& t_b,
                     const TrainConfig& config, double alpha);

/// Mean loss and encoder gradients over a batch, without updating anything.
struct BatchGradient {
  LossReport report;  // averaged values; grad_pa/grad_pb left empty
  EncoderGrads grads;
  std::size_t used_pairs = 0;
};
BatchGradient batch_gradient(const TrainState& state, const std::vector<const GraphPair*>& batch,
                             const TrainConfig& config, double alpha);

/// One optimizer step: batch gradient, Adam on the student, EMA on the teacher.
LossReport train_step(TrainState& state, const std::vector<const GraphPair*>& batch, const TrainConfig& config,
                      std::int64_t steps_per_epoch);

using EpochHook = std::function<void(const TrainState&, int epoch)>;

/// epochs x shuffled mini-batches. When `eval_set` is given, per-epoch test
/// accuracy is recorded in the history.
TrainState train(const std::vector<GraphPair>& dataset, const TrainConfig& config,
                 const std::vector<GraphPair>* eval_set = nullptr, const EpochHook& on_epoch = {});

/// Continue training an existing state for config.epochs more epochs.
void train_more(TrainState& state, const std::vector<GraphPair>& dataset, const TrainConfig& config,
                const std::vector<GraphPair>* eval_set = nullptr, const EpochHook& on_epoch = {});

}  // namespace rgm
