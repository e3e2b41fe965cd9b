#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace rgm::verify {

struct Check {
  std::string group;  // "equivalence", "gradient", "hungarian", ...
  std::string name;
  bool passed = false;
  int instances = 0;
  double worst = 0.0;  // largest observed error, in the check's own units
  double tolerance = 0.0;
};

/// Scales every analytic gradient by (1 + perturbation) before comparison.
/// Nonzero values exist only to confirm the gradient checks can fail.
struct Options {
  std::uint64_t seed = 20240611;
  double perturbation = 0.0;
};

/// Smoothed linear loss against the identity equals n * tau * the row
/// cross-entropy of InfoNCE, for `count` random matrices per tau.
Check loss_equivalence(int count, const std::vector<double>& taus, const Options& opt = {});

/// Central differences (h = 1e-5) for every loss and the encoder backward.
std::vector<Check> gradient_checks(int instances, const Options& opt = {});

/// Hungarian objective against exhaustive permutation search, n in [2, n_max].
Check hungarian_oracle(int instances_per_n, int n_max, const Options& opt = {});

/// Row and column sums of Sinkhorn output on random square inputs.
Check sinkhorn_marginals(int count, int n, int iterations, const Options& opt = {});

/// Teacher-student gap after k EMA updates against t^k, frozen student.
Check ema_decay(int k_max, double t, const Options& opt = {});

/// The selftest suite: equivalence, gradient, hungarian groups.
std::vector<Check> selftest(const Options& opt = {});

/// max |analytic - numeric| / max(max |numeric|, floor), over all entries.
double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric, double floor = 1e-8);

}  // namespace rgm::verify
