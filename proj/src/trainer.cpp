#include "rgm/trainer.hpp"

#include "rgm/inference.hpp"
#include "rgm/rng.hpp"

#include <algorithm>
#include <cmath>

namespace rgm {

namespace {

struct AblationName {
  Ablation tag;
  const char* name;
};

constexpr AblationName kAblationNames[] = {
    {Ablation::full, "full"},
    {Ablation::no_distill, "no_distill"},
    {Ablation::no_graph, "no_graph"},
    {Ablation::infonce_only, "infonce_only"},
    {Ablation::infonce_within, "infonce_within"},
    {Ablation::infonce_cross, "infonce_cross"},
};

constexpr std::uint64_t kShuffleStream = 0x53485546ULL << 32;

}  // namespace

std::string to_string(Ablation a) {
  for (const auto& e : kAblationNames)
    if (e.tag == a) return e.name;
  return "unknown";
}

Ablation parse_ablation(const std::string& name) {
  for (const auto& e : kAblationNames)
    if (name == e.name) return e.tag;
  throw ContractError("unknown ablation '" + name + "'");
}

const std::vector<Ablation>& all_ablations() {
  static const std::vector<Ablation> tags = [] {
    std::vector<Ablation> v;
    for (const auto& e : kAblationNames) v.push_back(e.tag);
    return v;
  }();
  return tags;
}

bool uses_distillation(Ablation a) { return a == Ablation::full || a == Ablation::no_graph; }

void TrainConfig::validate() const {
  require(learning_rate > 0.0, "TrainConfig: learning_rate must be positive");
  require(batch_size >= 1, "TrainConfig: batch_size must be >= 1");
  require(epochs >= 0, "TrainConfig: epochs must be >= 0");
  require(momentum_t >= 0.0 && momentum_t <= 1.0, "TrainConfig: momentum_t must be in [0, 1]");
  require(alpha_max >= 0.0 && alpha_max <= 1.0, "TrainConfig: alpha_max must be in [0, 1]");
  require(tau > 0.0, "TrainConfig: tau must be positive");
  require(embedding_dim >= 1, "TrainConfig: embedding_dim must be positive");
  for (auto h : hidden) require(h >= 1, "TrainConfig: hidden widths must be positive");
  require(within_weight >= 0.0 && cross_weight >= 0.0, "TrainConfig: loss weights must be non-negative");
}

double alpha_schedule(std::int64_t step, std::int64_t steps_per_epoch, double alpha_max) {
  require(steps_per_epoch >= 1, "alpha_schedule: steps_per_epoch must be >= 1");
  if (step <= 0) return 0.0;
  if (step >= steps_per_epoch) return alpha_max;
  return alpha_max * static_cast<double>(step) / static_cast<double>(steps_per_epoch);
}

void adam_step(Vector& params, const Vector& grads, AdamMoments& moments, double lr, std::int64_t step) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  require(params.size() == grads.size(), "adam_step: gradient size differs from parameters");
  require(step >= 1, "adam_step: step is 1-based");
  if (moments.first.size() == 0) moments.first = Vector::Zero(params.size());
  if (moments.second.size() == 0) moments.second = Vector::Zero(params.size());
  require(moments.first.size() == params.size() && moments.second.size() == params.size(),
          "adam_step: moment size differs from parameters");
  moments.first = beta1 * moments.first + (1.0 - beta1) * grads;
  moments.second = beta2 * moments.second + (1.0 - beta2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  params.array() -= lr * (moments.first.array() / c1) / ((moments.second.array() / c2).sqrt() + eps);
}

void adam_step(EncoderParams& params, const EncoderGrads& grads, AdamMoments& moments, double lr, std::int64_t step) {
  require(same_shape(params.layers, grads.layers), "adam_step: gradient shapes differ from parameters");
  Vector flat = flatten(params.layers);
  adam_step(flat, flatten(grads.layers), moments, lr, step);
  unflatten(params.layers, flat);
}

TrainState init_state(Eigen::Index input_dim, const TrainConfig& config) {
  config.validate();
  std::vector<Eigen::Index> dims{input_dim};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(config.embedding_dim);
  TrainState state;
  state.student = init_params(dims, config.seed);
  state.teacher = state.student;
  state.moments.first = Vector::Zero(state.student.parameter_count());
  state.moments.second = Vector::Zero(state.student.parameter_count());
  return state;
}

LossReport pair_loss(const Matrix& p_a, const Matrix& p_b, const Matrix& t_a, const Matrix& t_b,
                     const TrainConfig& config, double alpha) {
  LossConfig lc;
  lc.tau = config.tau;
  lc.alpha = alpha;
  lc.within_weight = config.within_weight;
  lc.cross_weight = config.cross_weight;
  lc.normalize_consistency = config.normalize_consistency;
  lc.confidence = config.confidence;

  auto from_term = [](const LossTerm& t) {
    LossReport r;
    r.total = r.infonce = t.value;
    r.grad_pa = t.grad_pa;
    r.grad_pb = t.grad_pb;
    return r;
  };

  switch (config.ablation) {
    case Ablation::full:
      return robust_quadratic(p_a, p_b, t_a, t_b, lc);
    case Ablation::no_distill:
      return quadratic_loss(p_a, p_b, lc);
    case Ablation::no_graph:
      return from_term(robust_infonce_term(p_a, p_b, t_a, t_b, lc.tau, alpha));
    case Ablation::infonce_only:
      return from_term(infonce_term(p_a, p_b, lc.tau));
    case Ablation::infonce_within:
      lc.cross_weight = 0.0;
      return quadratic_loss(p_a, p_b, lc);
    case Ablation::infonce_cross:
      lc.within_weight = 0.0;
      return quadratic_loss(p_a, p_b, lc);
  }
  throw ContractError("pair_loss: unhandled ablation");
}

namespace {

void accumulate(std::vector<Layer>& into, const EncoderGrads& g) {
  for (std::size_t l = 0; l < into.size(); ++l) {
    into[l].weight += g.layers[l].weight;
    into[l].bias += g.layers[l].bias;
  }
}

EncoderGrads zero_grads(const EncoderParams& params) {
  EncoderGrads g;
  for (const auto& l : params.layers)
    g.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
  return g;
}

}  // namespace

BatchGradient batch_gradient(const TrainState& state, const std::vector<const GraphPair*>& batch,
                             const TrainConfig& config, double alpha) {
  require(!batch.empty(), "train_step: empty batch");
  BatchGradient out;
  out.grads = zero_grads(state.student);
  const bool distill = uses_distillation(config.ablation);

  for (const GraphPair* pair : batch) {
    if (pair->gt.rows() < 2) continue;  // no negatives, InfoNCE undefined
    const auto [x_a, x_b] = align_keypoints(*pair);
    ForwardCache cache_a, cache_b;
    const Matrix p_a = forward(state.student, x_a, &cache_a);
    const Matrix p_b = forward(state.student, x_b, &cache_b);
    Matrix t_a, t_b;
    if (distill) {
      t_a = forward(state.teacher, x_a);
      t_b = forward(state.teacher, x_b);
    }
    const LossReport r = pair_loss(p_a, p_b, t_a, t_b, config, alpha);
    out.report.total += r.total;
    out.report.infonce += r.infonce;
    out.report.within += r.within;
    out.report.cross += r.cross;
    accumulate(out.grads.layers, backward(cache_a, r.grad_pa));
    accumulate(out.grads.layers, backward(cache_b, r.grad_pb));
    ++out.used_pairs;
  }
  if (out.used_pairs == 0) return out;
  const double inv = 1.0 / static_cast<double>(out.used_pairs);
  out.report.total *= inv;
  out.report.infonce *= inv;
  out.report.within *= inv;
  out.report.cross *= inv;
  for (auto& l : out.grads.layers) {
    l.weight *= inv;
    l.bias *= inv;
  }
  return out;
}

LossReport train_step(TrainState& state, const std::vector<const GraphPair*>& batch, const TrainConfig& config,
                      std::int64_t steps_per_epoch) {
  const double alpha = uses_distillation(config.ablation)
                           ? alpha_schedule(state.step, steps_per_epoch, config.alpha_max)
                           : 0.0;
  BatchGradient bg = batch_gradient(state, batch, config, alpha);
  state.skipped_pairs += batch.size() - bg.used_pairs;
  state.alpha_trace.push_back(alpha);
  ++state.step;
  if (bg.used_pairs > 0) adam_step(state.student, bg.grads, state.moments, config.learning_rate, state.step);
  state.teacher = ema_update(state.teacher, state.student, config.momentum_t);
  return bg.report;
}

void train_more(TrainState& state, const std::vector<GraphPair>& dataset, const TrainConfig& config,
                const std::vector<GraphPair>* eval_set, const EpochHook& on_epoch) {
  config.validate();
  require(!dataset.empty(), "train: empty dataset");
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const auto steps_per_epoch = static_cast<std::int64_t>((dataset.size() + batch - 1) / batch);

  std::vector<std::size_t> order(dataset.size());
  for (int e = 0; e < config.epochs; ++e) {
    const int epoch = static_cast<int>(state.history.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng = Rng::stream(config.seed, kShuffleStream + static_cast<std::uint64_t>(epoch));
    rng.shuffle(order);

    EpochSummary summary;
    summary.epoch = epoch + 1;
    std::int64_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::vector<const GraphPair*> mb;
      for (std::size_t i = start; i < std::min(order.size(), start + batch); ++i) mb.push_back(&dataset[order[i]]);
      const LossReport r = train_step(state, mb, config, steps_per_epoch);
      summary.loss += r.total;
      summary.infonce += r.infonce;
      summary.within += r.within;
      summary.cross += r.cross;
      ++steps;
    }
    const double inv = 1.0 / static_cast<double>(steps);
    summary.loss *= inv;
    summary.infonce *= inv;
    summary.within *= inv;
    summary.cross *= inv;
    summary.alpha = state.alpha_trace.back();
    if (eval_set) summary.accuracy = evaluate(state.inference_params(config), *eval_set).accuracy;
    state.history.push_back(summary);
    if (on_epoch) on_epoch(state, epoch);
  }
}

TrainState train(const std::vector<GraphPair>& dataset, const TrainConfig& config,
                 const std::vector<GraphPair>* eval_set, const EpochHook& on_epoch) {
  config.validate();
  require(!dataset.empty(), "train: empty dataset");
  TrainState state = init_state(dataset.front().desc_a.cols() + 2, config);
  train_more(state, dataset, config, eval_set, on_epoch);
  return state;
}

}  // namespace rgm
