#include "rgm/verify.hpp"

#include "rgm/assignment.hpp"
#include "rgm/encoder.hpp"
#include "rgm/losses.hpp"
#include "rgm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace rgm::verify {

namespace {

constexpr double kStep = 1e-5;
constexpr double kGradTol = 1e-5;

Matrix gaussian(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

Matrix unit_rows(Rng& rng, Eigen::Index r, Eigen::Index c) { return l2_normalize_rows(gaussian(rng, r, c)); }

// Student embeddings are probed off the unit sphere. On it the Gram
// difference has a zero diagonal, and heavily weighted zero entries make the
// central-difference truncation error swamp small gradients.
Matrix student(Rng& rng, Eigen::Index r, Eigen::Index c) {
  return gaussian(rng, r, c) / std::sqrt(static_cast<double>(c));
}

Vector flat(const Matrix& a, const Matrix& b) {
  Vector v(a.size() + b.size());
  v << a.reshaped<Eigen::RowMajor>(), b.reshaped<Eigen::RowMajor>();
  return v;
}

using PairLoss = std::function<LossTerm(const Matrix&, const Matrix&)>;

double pair_gradient_error(const PairLoss& loss, const Matrix& pa, const Matrix& pb, double perturbation) {
  const LossTerm t = loss(pa, pb);
  const Vector analytic = (1.0 + perturbation) * flat(t.grad_pa, t.grad_pb);
  Vector numeric(analytic.size());
  Matrix a = pa, b = pb;
  Eigen::Index k = 0;
  for (Matrix* m : {&a, &b}) {
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      for (Eigen::Index j = 0; j < m->cols(); ++j, ++k) {
        const double keep = (*m)(i, j);
        (*m)(i, j) = keep + kStep;
        const double up = loss(a, b).value;
        (*m)(i, j) = keep - kStep;
        const double down = loss(a, b).value;
        (*m)(i, j) = keep;
        numeric(k) = (up - down) / (2.0 * kStep);
      }
    }
  }
  return relative_error(analytic, numeric);
}

LossTerm as_term(const LossReport& r) { return {r.total, r.grad_pa, r.grad_pb}; }

double encoder_gradient_error(Rng& rng, Activation act, double perturbation) {
  const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(5));
  std::vector<Eigen::Index> dims;
  const auto depth = 2 + rng.below(3);
  for (std::uint64_t l = 0; l < depth; ++l) dims.push_back(2 + static_cast<Eigen::Index>(rng.below(7)));
  EncoderParams params = init_params(dims, rng.next_u64(), act);
  for (auto& layer : params.layers) layer.bias = gaussian(rng, 1, layer.bias.size()).row(0).transpose() * 0.1;
  const Matrix x = gaussian(rng, n, dims.front());
  const Matrix g = gaussian(rng, n, dims.back());

  ForwardCache cache;
  forward(params, x, &cache);
  const Vector analytic = (1.0 + perturbation) * flatten(backward(cache, g).layers);

  Vector theta = flatten(params.layers);
  Vector numeric(theta.size());
  EncoderParams probe = params;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double keep = theta(k);
    theta(k) = keep + kStep;
    unflatten(probe.layers, theta);
    const double up = g.cwiseProduct(forward(probe, x)).sum();
    theta(k) = keep - kStep;
    unflatten(probe.layers, theta);
    const double down = g.cwiseProduct(forward(probe, x)).sum();
    theta(k) = keep;
    numeric(k) = (up - down) / (2.0 * kStep);
  }
  return relative_error(analytic, numeric);
}

}  // namespace

double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric, double floor) {
  require(analytic.size() == numeric.size(), "relative_error: size mismatch");
  if (analytic.size() == 0) return 0.0;
  const double scale = std::max(numeric.cwiseAbs().maxCoeff(), floor);
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

Check loss_equivalence(int count, const std::vector<double>& taus, const Options& opt) {
  Check c{"equivalence", "smoothed linear loss = n*tau*InfoNCE row term", true, 0, 0.0, 1e-9};
  Rng rng = Rng::stream(opt.seed, 1);
  for (double tau : taus) {
    for (int k = 0; k < count; ++k) {
      const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(7));
      const Matrix s = gaussian(rng, n, n);
      const double lhs = smoothed_linear_loss(s, Assignment::identity(n), tau);
      const double rhs = static_cast<double>(n) * tau * cross_entropy_rows(Matrix::Identity(n, n), s, tau);
      const double err = std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
      c.worst = std::max(c.worst, err);
      ++c.instances;
    }
  }
  c.passed = c.worst < c.tolerance;
  return c;
}

std::vector<Check> gradient_checks(int instances, const Options& opt) {
  struct Case {
    const char* name;
    std::function<double(Rng&)> run;
  };
  const double pert = opt.perturbation;
  auto dims = [](Rng& rng) {
    return std::pair{2 + static_cast<Eigen::Index>(rng.below(5)), 2 + static_cast<Eigen::Index>(rng.below(7))};
  };
  auto teacher_pair = [](Rng& rng, Eigen::Index n, Eigen::Index d) {
    return std::pair{unit_rows(rng, n, d), unit_rows(rng, n, d)};
  };
  const std::vector<Case> cases = {
      {"infonce",
       [&](Rng& rng) {
         auto [n, d] = dims(rng);
         const double tau = rng.uniform(0.05, 1.0);
         return pair_gradient_error([&](const Matrix& a, const Matrix& b) { return infonce_term(a, b, tau); },
                                    student(rng, n, d), student(rng, n, d), pert);
       }},
      {"within consistency",
       [&](Rng& rng) {
         auto [n, d] = dims(rng);
         const bool norm = rng.below(2) == 1;
         return pair_gradient_error([&](const Matrix& a, const Matrix& b) { return within_term(a, b, norm); },
                                    student(rng, n, d), student(rng, n, d), pert);
       }},
      {"cross consistency",
       [&](Rng& rng) {
         auto [n, d] = dims(rng);
         const bool norm = rng.below(2) == 1;
         return pair_gradient_error([&](const Matrix& a, const Matrix& b) { return cross_term(a, b, norm); },
                                    student(rng, n, d), student(rng, n, d), pert);
       }},
      {"quadratic loss",
       [&](Rng& rng) {
         auto [n, d] = dims(rng);
         LossConfig cfg;
         cfg.tau = rng.uniform(0.05, 1.0);
         cfg.within_weight = rng.uniform(0.0, 2.0);
         cfg.cross_weight = rng.uniform(0.0, 2.0);
         return pair_gradient_error(
             [&](const Matrix& a, const Matrix& b) { return as_term(quadratic_loss(a, b, cfg)); },
             student(rng, n, d), student(rng, n, d), pert);
       }},
      {"robust infonce",
       [&](Rng& rng) {
         auto [n, d] = dims(rng);
         auto [ha, hb] = teacher_pair(rng, n, d);
         const double tau = rng.uniform(0.05, 1.0);
         const double alpha = rng.uniform();
         return pair_gradient_error(
             [&](const Matrix& a, const Matrix& b) { return robust_infonce_term(a, b, ha, hb, tau, alpha); },
             student(rng, n, d), student(rng, n, d), pert);
       }},
      {"robust graph consistency",
       [&](Rng& rng) {
         auto [n, d] = dims(rng);
         auto [ha, hb] = teacher_pair(rng, n, d);
         const Matrix w = edge_confidence(node_confidence(ha, hb, rng.uniform(0.05, 1.0)));
         const bool norm = rng.below(2) == 1;
         return pair_gradient_error([&](const Matrix& a, const Matrix& b) { return robust_graph_term(a, b, w, norm); },
                                    student(rng, n, d), student(rng, n, d), pert);
       }},
      {"robust quadratic loss",
       [&](Rng& rng) {
         auto [n, d] = dims(rng);
         auto [ha, hb] = teacher_pair(rng, n, d);
         LossConfig cfg;
         cfg.tau = rng.uniform(0.05, 1.0);
         cfg.alpha = rng.uniform();
         cfg.within_weight = rng.uniform(0.0, 2.0);
         cfg.cross_weight = rng.uniform(0.0, 2.0);
         return pair_gradient_error(
             [&](const Matrix& a, const Matrix& b) { return as_term(robust_quadratic(a, b, ha, hb, cfg)); },
             student(rng, n, d), student(rng, n, d), pert);
       }},
      {"encoder backward (relu)", [&](Rng& rng) { return encoder_gradient_error(rng, Activation::relu, pert); }},
      {"encoder backward (tanh)", [&](Rng& rng) { return encoder_gradient_error(rng, Activation::tanh, pert); }},
  };

  std::vector<Check> out;
  std::uint64_t index = 100;
  for (const auto& cs : cases) {
    Check c{"gradient", cs.name, true, 0, 0.0, kGradTol};
    Rng rng = Rng::stream(opt.seed, index++);
    for (int k = 0; k < instances; ++k) {
      c.worst = std::max(c.worst, cs.run(rng));
      ++c.instances;
    }
    c.passed = c.worst < c.tolerance;
    out.push_back(c);
  }
  return out;
}

Check hungarian_oracle(int instances_per_n, int n_max, const Options& opt) {
  Check c{"hungarian", "optimum equals exhaustive search", true, 0, 0.0, 0.0};
  Rng rng = Rng::stream(opt.seed, 2);
  for (int n = 2; n <= n_max; ++n) {
    for (int k = 0; k < instances_per_n; ++k) {
      const Matrix s = gaussian(rng, n, n);
      std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), 0);
      double best = -std::numeric_limits<double>::infinity();
      do {
        best = std::max(best, Assignment::from_columns(perm, n).score(s));
      } while (std::next_permutation(perm.begin(), perm.end()));
      const double got = hungarian(s).score(s);
      c.worst = std::max(c.worst, std::abs(best - got));
      if (got != best) c.passed = false;
      ++c.instances;
    }
  }
  return c;
}

Check sinkhorn_marginals(int count, int n, int iterations, const Options& opt) {
  Check c{"sinkhorn", "row and column sums equal one", true, 0, 0.0, 1e-6};
  Rng rng = Rng::stream(opt.seed, 3);
  for (int k = 0; k < count; ++k) {
    const Matrix p = sinkhorn(gaussian(rng, n, n), iterations, 1.0);
    const double rows = (p.rowwise().sum().array() - 1.0).abs().maxCoeff();
    const double cols = (p.colwise().sum().array() - 1.0).abs().maxCoeff();
    c.worst = std::max({c.worst, rows, cols});
    ++c.instances;
  }
  c.passed = c.worst < c.tolerance;
  return c;
}

Check ema_decay(int k_max, double t, const Options& opt) {
  Check c{"ema", "teacher gap decays as t^k", true, 0, 0.0, 1e-12};
  const EncoderParams student = init_params({6, 8, 4}, opt.seed);
  const EncoderParams start = init_params({6, 8, 4}, opt.seed + 1);
  const Vector target = flatten(student.layers);
  const double gap0 = (flatten(start.layers) - target).norm();
  EncoderParams teacher = start;
  for (int k = 1; k <= k_max; ++k) {
    teacher = ema_update(teacher, student, t);
    const double gap = (flatten(teacher.layers) - target).norm();
    const double expected = std::pow(t, k) * gap0;
    c.worst = std::max(c.worst, std::abs(gap - expected) / expected);
    ++c.instances;
  }
  c.passed = c.worst < c.tolerance;
  return c;
}

std::vector<Check> selftest(const Options& opt) {
  std::vector<Check> out;
  out.push_back(loss_equivalence(100, {0.07, 0.5, 1.0}, opt));
  for (auto& g : gradient_checks(20, opt)) out.push_back(g);
  out.push_back(hungarian_oracle(200, 6, opt));
  return out;
}

}  // namespace rgm::verify
