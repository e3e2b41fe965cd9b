#pragma once

#include "rgm/synthetic.hpp"
#include "rgm/trainer.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace rgm {

/// Everything needed to reproduce one train-and-evaluate run.
struct ExperimentSpec {
  DatasetSpec data;  // train split; data.pairs is the train size
  Eigen::Index test_pairs = 100;
  TrainConfig train;
};

struct SweepRow {
  double eta = 0.0;
  Ablation method = Ablation::full;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double mean_clean_sim = 0.0;  // over training correspondences, after training
  double mean_noisy_sim = 0.0;  // NaN when no training keypoint is noisy
};

struct SweepResult {
  std::vector<SweepRow> rows;  // completed cells, in grid order
  std::size_t trained = 0;
  std::size_t reused = 0;
  bool complete = true;
};

/// Resume support. `lookup` supplies rows finished by an earlier run;
/// `on_row` sees each newly trained row and its final state as soon as they
/// exist (calls are serialized). At most `max_new_cells` cells are trained.
struct SweepHooks {
  std::function<std::optional<SweepRow>(double eta, Ablation method, std::uint64_t seed)> lookup;
  std::function<void(const SweepRow&, const TrainState&)> on_row;
  std::size_t max_new_cells = std::numeric_limits<std::size_t>::max();
};

/// Generates the benchmark for (eta, seed), trains `method` and evaluates on
/// the clean test split. Data and initialization both derive from `seed`.
SweepRow run_cell(const ExperimentSpec& base, double eta, Ablation method, std::uint64_t seed,
                  TrainState* state_out = nullptr);

/// Full factorial over etas x methods x seeds, rows in that nesting order.
/// Cells are independent; `jobs` > 1 runs them on worker threads.
SweepResult sweep_noise(const ExperimentSpec& base, const std::vector<double>& etas,
                        const std::vector<Ablation>& methods, const std::vector<std::uint64_t>& seeds, int jobs = 1,
                        const SweepHooks& hooks = {});

struct AblationRow {
  Ablation tag = Ablation::full;
  std::vector<double> accuracies;  // one per seed
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single seed
};

/// One train+evaluate per tag on identical data and initialization.
std::vector<AblationRow> ablation_grid(const Benchmark& data, const TrainConfig& config,
                                       const std::vector<Ablation>& tags);

/// Seed-averaged ablation grid: each seed draws its own benchmark.
std::vector<AblationRow> ablation_grid(const ExperimentSpec& base, const std::vector<Ablation>& tags,
                                       const std::vector<std::uint64_t>& seeds, int jobs = 1);

double mean(const std::vector<double>& v);
double sample_stddev(const std::vector<double>& v);

}  // namespace rgm
