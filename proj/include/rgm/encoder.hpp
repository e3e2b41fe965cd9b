#pragma once

#include "rgm/core.hpp"

#include <cstdint>
#include <vector>

namespace rgm {

enum class Activation { relu, tanh };

struct Layer {
  Matrix weight;  // d_in x d_out
  Vector bias;    // d_out
};

/// MLP weights: hidden layers apply `activation`, the last layer is affine,
/// and the output rows are L2-normalized.
struct EncoderParams {
  std::vector<Layer> layers;
  Activation activation = Activation::relu;

  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;
  std::vector<Eigen::Index> dims() const;
  Eigen::Index parameter_count() const;

  bool operator==(const EncoderParams& other) const;
};

struct EncoderGrads {
  std::vector<Layer> layers;
};

/// Intermediates of one forward pass. Holds its own copy of the weights so
/// backward does not depend on the caller keeping params alive or unchanged.
struct ForwardCache {
  std::vector<Layer> layers;
  Activation activation = Activation::relu;
  std::vector<Matrix> inputs;       // input to each layer
  std::vector<Matrix> preactivations;
  Vector norms;                     // row norms before normalization
  Matrix output;
};

EncoderParams init_params(const std::vector<Eigen::Index>& layer_dims, std::uint64_t seed,
                          Activation activation = Activation::relu);

Matrix forward(const EncoderParams& params, const Matrix& x, ForwardCache* cache = nullptr);

EncoderGrads backward(const ForwardCache& cache, const Matrix& grad_p);

/// theta_k <- t * theta_k + (1 - t) * theta_q
EncoderParams ema_update(const EncoderParams& teacher, const EncoderParams& student, double t);

// Flat views in layer order (weight row-major, then bias), used by the
// optimizer, checkpoints and gradient checks.
Vector flatten(const std::vector<Layer>& layers);
void unflatten(std::vector<Layer>& layers, const Vector& values);

bool same_shape(const std::vector<Layer>& a, const std::vector<Layer>& b);

}  // namespace rgm
