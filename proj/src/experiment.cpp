#include "rgm/experiment.hpp"

#include "rgm/inference.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <cmath>
#include <thread>

namespace rgm {

double mean(const std::vector<double>& v) {
  require(!v.empty(), "mean: empty input");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

namespace {

Benchmark cell_benchmark(const ExperimentSpec& base, double eta, std::uint64_t seed) {
  DatasetSpec data = base.data;
  data.eta = eta;
  data.seed = seed;
  return make_benchmark(data, base.test_pairs);
}

// Runs fn(i) for i in [0, count) on up to `jobs` threads.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

SweepRow run_cell(const ExperimentSpec& base, double eta, Ablation method, std::uint64_t seed,
                  TrainState* state_out) {
  const Benchmark bench = cell_benchmark(base, eta, seed);
  TrainConfig config = base.train;
  config.ablation = method;
  config.seed = seed;
  const TrainState state = train(bench.train, config);
  const EncoderParams& params = state.inference_params(config);

  SweepRow row;
  row.eta = eta;
  row.method = method;
  row.seed = seed;
  row.accuracy = evaluate(params, bench.test).accuracy;
  const SimilarityHistogram hist = similarity_histogram(params, bench.train, 20);
  row.mean_clean_sim = hist.clean_mean;
  row.mean_noisy_sim = hist.noisy_mean;
  if (state_out) *state_out = state;
  return row;
}

SweepResult sweep_noise(const ExperimentSpec& base, const std::vector<double>& etas,
                        const std::vector<Ablation>& methods, const std::vector<std::uint64_t>& seeds, int jobs,
                        const SweepHooks& hooks) {
  require(!etas.empty() && !methods.empty() && !seeds.empty(), "sweep_noise: empty grid");
  struct Cell {
    double eta;
    Ablation method;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (double eta : etas)
    for (Ablation m : methods)
      for (std::uint64_t s : seeds) cells.push_back({eta, m, s});

  SweepResult result;
  std::vector<std::optional<SweepRow>> rows(cells.size());
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (hooks.lookup) rows[i] = hooks.lookup(cells[i].eta, cells[i].method, cells[i].seed);
    if (rows[i]) {
      ++result.reused;
    } else if (todo.size() < hooks.max_new_cells) {
      todo.push_back(i);
    } else {
      result.complete = false;
    }
  }

  std::mutex row_mutex;
  parallel_for(todo.size(), jobs, [&](std::size_t k) {
    const Cell& c = cells[todo[k]];
    TrainState state;
    SweepRow row = run_cell(base, c.eta, c.method, c.seed, hooks.on_row ? &state : nullptr);
    std::lock_guard lock(row_mutex);
    if (hooks.on_row) hooks.on_row(row, state);
    rows[todo[k]] = row;
  });
  result.trained = todo.size();
  for (auto& r : rows)
    if (r) result.rows.push_back(*r);
  return result;
}

std::vector<AblationRow> ablation_grid(const Benchmark& data, const TrainConfig& config,
                                       const std::vector<Ablation>& tags) {
  require(!tags.empty(), "ablation_grid: no tags");
  std::vector<AblationRow> rows;
  for (Ablation tag : tags) {
    TrainConfig c = config;
    c.ablation = tag;
    const TrainState state = train(data.train, c);
    AblationRow row;
    row.tag = tag;
    row.accuracies.push_back(evaluate(state.inference_params(c), data.test).accuracy);
    row.mean = row.accuracies.front();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<AblationRow> ablation_grid(const ExperimentSpec& base, const std::vector<Ablation>& tags,
                                       const std::vector<std::uint64_t>& seeds, int jobs) {
  require(!tags.empty() && !seeds.empty(), "ablation_grid: empty grid");
  const SweepResult sweep = sweep_noise(base, {base.data.eta}, tags, seeds, jobs);
  std::vector<AblationRow> rows;
  for (std::size_t t = 0; t < tags.size(); ++t) {
    AblationRow row;
    row.tag = tags[t];
    for (std::size_t s = 0; s < seeds.size(); ++s) row.accuracies.push_back(sweep.rows[t * seeds.size() + s].accuracy);
    row.mean = mean(row.accuracies);
    row.stddev = sample_stddev(row.accuracies);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rgm
