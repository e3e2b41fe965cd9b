#include "cli.hpp"

#include "rgm/experiment.hpp"
#include "rgm/io.hpp"
#include "rgm/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

using namespace rgm;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool passed, const std::string& detail) {
  if (!passed) ++failures;
  std::printf("%s %2d %-26s %s\n", passed ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

template <typename F>
double timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Seed-averaged value per (eta, method).
struct Table {
  std::map<std::pair<double, Ablation>, std::vector<SweepRow>> cells;
  void add(const SweepResult& r) {
    for (const auto& row : r.rows) cells[{row.eta, row.method}].push_back(row);
  }
  double accuracy(double eta, Ablation m) const {
    std::vector<double> v;
    for (const auto& r : cells.at({eta, m})) v.push_back(r.accuracy);
    return mean(v);
  }
};

}  // namespace

int main() {
  const int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

  {
    verify::Check c;
    const double s = timed([&] { c = verify::loss_equivalence(100, {0.07, 0.5, 1.0}); });
    report(1, "smoothed-loss equivalence", c.passed && s < 1.0,
           fmt("%d instances, worst rel %.2e < %.0e, %.2f s < 1 s", c.instances, c.worst, c.tolerance, s));
  }
  {
    std::vector<verify::Check> cs;
    const double s = timed([&] { cs = verify::gradient_checks(20); });
    bool ok = s < 30.0;
    double worst = 0.0;
    int least = 1 << 30;
    for (const auto& c : cs) {
      ok = ok && c.passed;
      worst = std::max(worst, c.worst);
      least = std::min(least, c.instances);
    }
    report(2, "gradient exactness", ok,
           fmt("%zu checks x >= %d instances, worst rel %.2e < 1e-05, %.2f s < 30 s", cs.size(), least, worst, s));
  }
  {
    verify::Check c;
    const double s = timed([&] { c = verify::hungarian_oracle(200, 7); });
    report(3, "hungarian oracle", c.passed && s < 10.0,
           fmt("%d instances n=2..7, worst gap %.1e, %.2f s < 10 s", c.instances, c.worst, s));
  }
  {
    const verify::Check c = verify::sinkhorn_marginals(50, 5, 100);
    report(4, "sinkhorn marginals", c.passed, fmt("50 inputs 5x5, worst deviation %.2e < 1e-06", c.worst));
  }

  ExperimentSpec base;
  Table table;
  SweepResult clean, noisy, ablation;
  const double t_clean = timed([&] { clean = sweep_noise(base, {0.0}, {Ablation::full}, seeds, jobs); });
  table.add(clean);
  {
    const double acc = table.accuracy(0.0, Ablation::full);
    report(5, "clean accuracy", acc >= 0.95 && t_clean < 300.0,
           fmt("full at eta=0: %.4f >= 0.95 (5 seeds), %.0f s < 300 s", acc, t_clean));
  }

  const double t_noisy =
      timed([&] { noisy = sweep_noise(base, {0.3, 0.5}, {Ablation::full, Ablation::no_distill}, seeds, jobs); });
  table.add(noisy);
  {
    bool ok = t_noisy < 1800.0;
    std::string detail;
    for (double eta : {0.3, 0.5}) {
      const double full = table.accuracy(eta, Ablation::full);
      const double nd = table.accuracy(eta, Ablation::no_distill);
      ok = ok && full - nd >= 0.02;
      detail += fmt("eta=%.1f full %.4f no_distill %.4f gap %+.4f; ", eta, full, nd, full - nd);
    }
    report(6, "noise robustness", ok, detail + fmt("gap >= 0.02, %.0f s < 1800 s", t_noisy));
  }
  {
    bool ok = true;
    double least = 1e9;
    for (const auto& r : table.cells.at({0.3, Ablation::full})) {
      const double gap = r.mean_clean_sim - r.mean_noisy_sim;
      ok = ok && gap >= 0.1;
      least = std::min(least, gap);
    }
    report(7, "similarity separation", ok, fmt("full at eta=0.3: smallest clean-noisy gap %.4f >= 0.1 (every seed)", least));
  }

  ablation = sweep_noise(base, {0.0}, {Ablation::no_graph, Ablation::infonce_only}, seeds, jobs);
  table.add(ablation);
  {
    const double full = table.accuracy(0.0, Ablation::full);
    const double ng = table.accuracy(0.0, Ablation::no_graph);
    const double io = table.accuracy(0.0, Ablation::infonce_only);
    const bool ok = full >= ng - 0.005 && full >= io - 0.005;
    report(8, "ablation ordering", ok,
           fmt("eta=0: full %.4f, no_graph %.4f, infonce_only %.4f (tolerance 0.005)", full, ng, io));
  }

  {
    const fs::path dir = fs::temp_directory_path() / "rgm_acceptance_sweep";
    fs::remove_all(dir);
    auto sweep = [&](const std::string& name) {
      std::ostringstream out, err;
      const fs::path csv = dir / name;
      const int code = cli::run({"rgm", "sweep", "--etas", "0,0.3", "--methods", "full,no_distill", "--seeds", "1,2",
                                 "--train-pairs", "40", "--test-pairs", "20", "--epochs", "3", "--jobs",
                                 std::to_string(jobs), "--fresh", "--out-csv", csv.string()},
                                out, err);
      return code == 0 ? io::csv_body(io::read_text(csv)) : std::string();
    };
    const std::string a = sweep("a.csv");
    const std::string b = sweep("b.csv");
    const auto lines = std::count(a.begin(), a.end(), '\n');
    report(9, "determinism", !a.empty() && a == b,
           fmt("two sweep runs, %ld body lines, %s", static_cast<long>(lines), a == b ? "identical" : "differ"));
    fs::remove_all(dir);
  }
  {
    const verify::Check c = verify::ema_decay(200, 0.995);
    report(10, "ema decay", c.passed, fmt("k <= 200, worst rel %.2e < 1e-12", c.worst));
  }

  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
