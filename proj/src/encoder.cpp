#include "rgm/encoder.hpp"

#include "rgm/rng.hpp"

#include <cmath>

namespace rgm {

Eigen::Index EncoderParams::input_dim() const {
  require(!layers.empty(), "EncoderParams: no layers");
  return layers.front().weight.rows();
}

Eigen::Index EncoderParams::output_dim() const {
  require(!layers.empty(), "EncoderParams: no layers");
  return layers.back().weight.cols();
}

std::vector<Eigen::Index> EncoderParams::dims() const {
  std::vector<Eigen::Index> d;
  if (layers.empty()) return d;
  d.push_back(layers.front().weight.rows());
  for (const auto& l : layers) d.push_back(l.weight.cols());
  return d;
}

Eigen::Index EncoderParams::parameter_count() const {
  Eigen::Index count = 0;
  for (const auto& l : layers) count += l.weight.size() + l.bias.size();
  return count;
}

bool EncoderParams::operator==(const EncoderParams& other) const {
  if (activation != other.activation || !same_shape(layers, other.layers)) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].weight != other.layers[i].weight || layers[i].bias != other.layers[i].bias) return false;
  }
  return true;
}

bool same_shape(const std::vector<Layer>& a, const std::vector<Layer>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].weight.rows() != b[i].weight.rows() || a[i].weight.cols() != b[i].weight.cols() ||
        a[i].bias.size() != b[i].bias.size())
      return false;
  }
  return true;
}

EncoderParams init_params(const std::vector<Eigen::Index>& layer_dims, std::uint64_t seed, Activation activation) {
  require(layer_dims.size() >= 2, "init_params: need at least input and output dims");
  for (const auto d : layer_dims) require(d > 0, "init_params: dims must be positive");
  Rng rng(seed);
  EncoderParams params;
  params.activation = activation;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const Eigen::Index d_in = layer_dims[l];
    const Eigen::Index d_out = layer_dims[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
    Layer layer{Matrix(d_in, d_out), Vector::Zero(d_out)};
    for (Eigen::Index i = 0; i < d_in; ++i)
      for (Eigen::Index j = 0; j < d_out; ++j) layer.weight(i, j) = rng.uniform(-bound, bound);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

namespace {

Matrix activate(const Matrix& z, Activation a) {
  switch (a) {
    case Activation::relu: return z.cwiseMax(0.0);
    case Activation::tanh: return z.array().tanh().matrix();
  }
  return z;
}

// Derivative of the activation at pre-activation z, times upstream gradient.
Matrix activation_backward(const Matrix& z, const Matrix& upstream, Activation a) {
  switch (a) {
    case Activation::relu: return (z.array() > 0.0).select(upstream, 0.0);
    case Activation::tanh: return upstream.cwiseProduct((1.0 - z.array().tanh().square()).matrix());
  }
  return upstream;
}

}  // namespace

Matrix forward(const EncoderParams& params, const Matrix& x, ForwardCache* cache) {
  require(!params.layers.empty(), "forward: encoder has no layers");
  require(x.cols() == params.input_dim(), "forward: input has " + std::to_string(x.cols()) + " columns, encoder expects " +
                                              std::to_string(params.input_dim()));
  if (cache) {
    cache->layers = params.layers;
    cache->activation = params.activation;
    cache->inputs.clear();
    cache->preactivations.clear();
  }
  Matrix a = x;
  const std::size_t last = params.layers.size() - 1;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const Layer& layer = params.layers[l];
    Matrix z = a * layer.weight;
    z.rowwise() += layer.bias.transpose();
    if (cache) {
      cache->inputs.push_back(a);
      cache->preactivations.push_back(z);
    }
    a = l == last ? z : activate(z, params.activation);
  }
  Vector norms = a.rowwise().norm();
  Matrix p = l2_normalize_rows(a);
  if (cache) {
    cache->norms = std::move(norms);
    cache->output = p;
  }
  return p;
}

EncoderGrads backward(const ForwardCache& cache, const Matrix& grad_p) {
  require(!cache.layers.empty() && cache.inputs.size() == cache.layers.size(), "backward: cache is empty or stale");
  require_same_shape(cache.output, grad_p, "backward");

  // Row normalization p = z / |z|: dz = (dp - p (p . dp)) / |z|
  const Vector proj = cache.output.cwiseProduct(grad_p).rowwise().sum();
  Matrix dz = grad_p - cache.output.cwiseProduct(proj.replicate(1, grad_p.cols()));
  dz.array().colwise() /= cache.norms.array();

  EncoderGrads grads;
  grads.layers.resize(cache.layers.size());
  for (std::size_t l = cache.layers.size(); l-- > 0;) {
    grads.layers[l].weight = cache.inputs[l].transpose() * dz;
    grads.layers[l].bias = dz.colwise().sum().transpose();
    if (l > 0) {
      const Matrix da = dz * cache.layers[l].weight.transpose();
      dz = activation_backward(cache.preactivations[l - 1], da, cache.activation);
    }
  }
  return grads;
}

EncoderParams ema_update(const EncoderParams& teacher, const EncoderParams& student, double t) {
  require(same_shape(teacher.layers, student.layers), "ema_update: teacher and student shapes differ");
  require(t >= 0.0 && t <= 1.0, "ema_update: t must be in [0, 1]");
  EncoderParams out = teacher;
  for (std::size_t l = 0; l < out.layers.size(); ++l) {
    out.layers[l].weight = t * teacher.layers[l].weight + (1.0 - t) * student.layers[l].weight;
    out.layers[l].bias = t * teacher.layers[l].bias + (1.0 - t) * student.layers[l].bias;
  }
  return out;
}

Vector flatten(const std::vector<Layer>& layers) {
  Eigen::Index total = 0;
  for (const auto& l : layers) total += l.weight.size() + l.bias.size();
  Vector out(total);
  Eigen::Index at = 0;
  for (const auto& l : layers) {
    out.segment(at, l.weight.size()) = l.weight.reshaped<Eigen::RowMajor>();
    at += l.weight.size();
    out.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  }
  return out;
}

void unflatten(std::vector<Layer>& layers, const Vector& values) {
  Eigen::Index total = 0;
  for (const auto& l : layers) total += l.weight.size() + l.bias.size();
  require(values.size() == total, "unflatten: value count does not match layer shapes");
  Eigen::Index at = 0;
  for (auto& l : layers) {
    l.weight.reshaped<Eigen::RowMajor>() = values.segment(at, l.weight.size());
    at += l.weight.size();
    l.bias = values.segment(at, l.bias.size());
    at += l.bias.size();
  }
}

}  // namespace rgm
