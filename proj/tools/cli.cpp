#include "cli.hpp"

#include "rgm/experiment.hpp"
#include "rgm/inference.hpp"
#include "rgm/io.hpp"
#include "rgm/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

namespace rgm::cli {

namespace fs = std::filesystem;

namespace {

// Flags that map onto config keys are recorded in command-line order and
// applied after the config file.
struct Overrides {
  std::vector<std::pair<std::string, std::string>> entries;
};

void key_option(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key,
                const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&ov, key](const std::string& v) { ov.entries.emplace_back(key, v); }, help);
}

void key_flag(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key,
              const std::string& help) {
  app->add_flag_callback(flag, [&ov, key] { ov.entries.emplace_back(key, "true"); }, help);
}

void training_options(CLI::App* app, Overrides& ov) {
  key_option(app, ov, "--lr", "learning_rate", "Adam learning rate");
  key_option(app, ov, "--batch-size", "batch_size", "pairs per optimizer step");
  key_option(app, ov, "--epochs", "epochs", "training epochs");
  key_option(app, ov, "--momentum", "momentum_t", "teacher EMA coefficient t");
  key_option(app, ov, "--alpha-max", "alpha_max", "distillation weight after the first epoch");
  key_option(app, ov, "--tau", "tau", "softmax temperature");
  key_option(app, ov, "--hidden", "hidden", "hidden layer widths, comma separated");
  key_option(app, ov, "--embedding-dim", "embedding_dim", "output embedding width");
  key_option(app, ov, "--within-weight", "within_weight", "weight of the within-graph term");
  key_option(app, ov, "--cross-weight", "cross_weight", "weight of the cross-graph term");
  key_flag(app, ov, "--normalize-consistency", "normalize_consistency", "divide graph terms by n^2");
  key_option(app, ov, "--confidence", "confidence", "node confidence: softmax or ratio");
  key_flag(app, ov, "--teacher-eval", "eval_teacher", "evaluate with the EMA teacher");
}

void data_options(CLI::App* app, Overrides& ov, bool generator) {
  key_option(app, ov, generator ? "--n-pairs" : "--train-pairs", "train_pairs", "number of pairs");
  key_option(app, ov, "--keypoints", "keypoints", "keypoints per graph");
  key_option(app, ov, "--categories", "categories", "number of categories");
  key_option(app, ov, "--jitter", "jitter", "descriptor noise between views");
  key_flag(app, ov, "--both-sides", "both_sides", "displace noisy keypoints in both graphs");
  key_option(app, ov, "--descriptor-dim", "descriptor_dim", "descriptor channels");
  key_option(app, ov, "--clutter-dims", "clutter_dims", "trailing channels without identity");
  key_option(app, ov, "--clutter", "clutter", "noise std on the clutter channels");
}

ExperimentSpec resolve(const std::string& config_path, const Overrides& ov) {
  ExperimentSpec spec;
  if (!config_path.empty()) {
    try {
      spec = io::read_config(config_path, spec);
    } catch (const ContractError& e) {
      throw io::DataError(config_path + ": " + e.what());
    }
  }
  for (const auto& [k, v] : ov.entries) io::apply_config_entry(k, v, spec);
  spec.train.validate();
  require(spec.data.eta >= 0.0 && spec.data.eta <= 1.0, "eta must be in [0, 1]");
  require(spec.data.pairs >= 1, "need at least one pair");
  require(spec.data.keypoints >= 1, "need at least one keypoint");
  require(spec.data.categories >= 1, "need at least one category");
  require(spec.test_pairs >= 1, "need at least one test pair");
  return spec;
}

fs::path data_path(const std::string& p) {
  const fs::path path(p);
  if (path.is_relative()) {
    if (const char* dir = std::getenv("RGM_DATA_DIR"); dir && *dir) return fs::path(dir) / path;
  }
  return path;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string metadata(const std::string& command, const std::string& extra) {
  return "rgm " + command + " format_version=" + std::to_string(io::kFormatVersion) + (extra.empty() ? "" : " ") +
         extra + " created=" + timestamp();
}

void echo_config(std::ostream& out, const ExperimentSpec& spec) {
  out << "# resolved configuration\n" << io::format_config(spec) << "# end configuration\n";
}

std::string with_suffix(const std::string& base, const std::string& suffix) { return base + suffix; }

// ---------------------------------------------------------------------------

struct GenerateArgs {
  Overrides ov;
  std::string config, out;
  long long first_index = 0;
};

int do_generate(const GenerateArgs& a, std::ostream& out) {
  const ExperimentSpec spec = resolve(a.config, a.ov);
  echo_config(out, spec);
  DatasetSpec d = spec.data;
  d.first_index = a.first_index;
  const auto pairs = generate_dataset(d);
  const fs::path path = data_path(a.out);
  io::write_dataset(path, pairs);

  std::size_t flagged = 0, lo = SIZE_MAX, hi = 0;
  for (const auto& p : pairs) {
    const auto k = p.noise_count();
    flagged += k;
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  out << "wrote " << pairs.size() << " pairs to " << path.string() << "\n"
      << "keypoints per graph: " << d.keypoints << ", descriptor dim: " << d.view.descriptor_dim << "\n"
      << "noisy keypoints: " << flagged << " total, " << lo << " to " << hi << " per pair\n";
  return ok;
}

struct TrainArgs {
  Overrides ov;
  std::string config, data, eval_data, checkpoint, history, resume;
  int checkpoint_every = 0;
};

int do_train(const TrainArgs& a, std::ostream& out) {
  const ExperimentSpec spec = resolve(a.config, a.ov);
  const TrainConfig& config = spec.train;
  echo_config(out, spec);
  const auto dataset = io::read_dataset(data_path(a.data));
  std::vector<GraphPair> eval_set;
  if (!a.eval_data.empty()) eval_set = io::read_dataset(data_path(a.eval_data));

  io::Checkpoint ckpt;
  ckpt.config = config;
  if (!a.resume.empty()) {
    const io::Checkpoint prev = io::read_checkpoint(a.resume);
    ckpt.state = prev.state;
    TrainConfig arch = config;
    const TrainState fresh = init_state(dataset.front().desc_a.cols() + 2, arch);
    if (fresh.student.dims() != prev.state.student.dims())
      throw io::DataError(a.resume + ": checkpoint architecture does not match the configuration and data");
    out << "resuming from " << a.resume << " after " << prev.state.history.size() << " epochs\n";
  } else {
    ckpt.state = init_state(dataset.front().desc_a.cols() + 2, config);
  }

  const std::string history_path = a.history.empty() ? with_suffix(a.checkpoint, ".history.csv") : a.history;
  const std::string meta = metadata("train", "ablation=" + to_string(config.ablation) +
                                                 " seed=" + std::to_string(config.seed));
  auto save = [&](const TrainState& state) {
    ckpt.state = state;
    ckpt.epochs_done = static_cast<int>(state.history.size());
    io::write_checkpoint(a.checkpoint, ckpt);
    io::write_text(history_path, io::history_csv(state, meta));
  };
  train_more(ckpt.state, dataset, config, eval_set.empty() ? nullptr : &eval_set,
             [&](const TrainState& state, int epoch) {
               const EpochSummary& e = state.history.back();
               out << "epoch " << e.epoch << " loss " << io::format_number(e.loss) << " alpha "
                   << io::format_number(e.alpha);
               if (!std::isnan(e.accuracy)) out << " accuracy " << io::format_number(e.accuracy);
               out << "\n";
               if (a.checkpoint_every > 0 && (epoch + 1) % a.checkpoint_every == 0) save(state);
             });
  const TrainState final_state = ckpt.state;
  save(final_state);
  if (final_state.skipped_pairs > 0) out << "skipped " << final_state.skipped_pairs << " pair visits with n < 2\n";
  out << "checkpoint: " << a.checkpoint << "\nhistory: " << history_path << "\n";
  return ok;
}

struct EvalArgs {
  std::string checkpoint, data, hist_out;
  int bins = 20;
  bool teacher = false;
};

int do_eval(const EvalArgs& a, std::ostream& out) {
  if (a.bins < 1) throw ContractError("--bins must be positive");
  const io::Checkpoint ckpt = io::read_checkpoint(a.checkpoint);
  ExperimentSpec spec;
  spec.train = ckpt.config;
  if (a.teacher) spec.train.eval_teacher = true;
  echo_config(out, spec);
  const auto dataset = io::read_dataset(data_path(a.data));
  if (dataset.front().desc_a.cols() + 2 != ckpt.state.student.input_dim())
    throw io::DataError("dataset features do not match the checkpoint input width");
  const EncoderParams& params = ckpt.state.inference_params(spec.train);
  const Evaluation ev = evaluate(params, dataset);
  const SimilarityHistogram hist = similarity_histogram(params, dataset, a.bins);
  out << "model: " << (spec.train.eval_teacher ? "teacher" : "student") << "\n"
      << "accuracy: " << io::format_number(ev.accuracy) << " over " << ev.per_pair.size() << " pairs";
  if (ev.skipped > 0) out << " (" << ev.skipped << " skipped)";
  out << "\nmean clean similarity: " << io::format_number(hist.clean_mean)
      << "\nmean noisy similarity: " << io::format_number(hist.noisy_mean) << "\n";
  if (!a.hist_out.empty()) {
    io::write_text(a.hist_out, io::histogram_json(hist) + "\n");
    out << "histogram: " << a.hist_out << "\n";
  }
  return ok;
}

struct SweepArgs {
  Overrides ov;
  std::string config, out_csv, summary, plot;
  std::vector<double> etas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::string> methods{"full", "no_distill", "no_graph", "infonce_only"};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int jobs = 1;
  long long max_cells = -1;
  bool fresh = false;
  std::string checkpoint_dir;
};

std::vector<Ablation> parse_methods(const std::vector<std::string>& names) {
  std::vector<Ablation> out;
  for (const auto& n : names) out.push_back(parse_ablation(n));
  return out;
}

int do_sweep(const SweepArgs& a, std::ostream& out) {
  const ExperimentSpec spec = resolve(a.config, a.ov);
  const auto methods = parse_methods(a.methods);
  for (double eta : a.etas) require(eta >= 0.0 && eta <= 1.0, "etas must be in [0, 1]");
  require(a.jobs >= 1, "--jobs must be at least 1");
  echo_config(out, spec);

  const std::string manifest_path = a.out_csv + ".manifest";
  const std::string fingerprint = io::sweep_fingerprint(spec);
  io::Manifest manifest;
  if (!a.fresh) manifest = io::read_manifest(manifest_path);
  if (!manifest.fingerprint.empty() && manifest.fingerprint != fingerprint) {
    out << "manifest " << manifest_path << " was written with a different configuration; starting over\n";
    manifest.rows.clear();
  }
  std::map<std::tuple<std::string, int, std::uint64_t>, SweepRow> done;
  for (const auto& r : manifest.rows)
    done[{io::format_number(r.eta), static_cast<int>(r.method), r.seed}] = r;
  {
    std::string text = io::manifest_header(fingerprint);
    for (const auto& [key, r] : done) text += io::sweep_row_csv(r) + "\n";
    io::write_text(manifest_path, text);
  }

  const std::size_t total = a.etas.size() * methods.size() * a.seeds.size();
  std::size_t finished = 0;
  std::ofstream log(manifest_path, std::ios::app);
  SweepHooks hooks;
  hooks.lookup = [&](double eta, Ablation m, std::uint64_t seed) -> std::optional<SweepRow> {
    auto it = done.find({io::format_number(eta), static_cast<int>(m), seed});
    if (it == done.end()) return std::nullopt;
    SweepRow r = it->second;
    r.eta = eta;
    return r;
  };
  hooks.on_row = [&](const SweepRow& r, const TrainState& state) {
    log << io::sweep_row_csv(r) << "\n" << std::flush;
    ++finished;
    out << "[" << finished << "] eta=" << io::format_number(r.eta) << " method=" << to_string(r.method)
        << " seed=" << r.seed << " accuracy=" << io::format_number(r.accuracy) << "\n"
        << std::flush;
    if (!a.checkpoint_dir.empty()) {
      io::Checkpoint c;
      c.state = state;
      c.config = spec.train;
      c.config.ablation = r.method;
      c.config.seed = r.seed;
      c.epochs_done = static_cast<int>(state.history.size());
      const std::string name = "eta" + io::format_number(r.eta) + "_" + to_string(r.method) + "_seed" +
                               std::to_string(r.seed) + ".json";
      io::write_checkpoint(fs::path(a.checkpoint_dir) / name, c);
    }
  };
  if (a.max_cells >= 0) hooks.max_new_cells = static_cast<std::size_t>(a.max_cells);

  const SweepResult result = sweep_noise(spec, a.etas, methods, a.seeds, a.jobs, hooks);
  log.close();

  const std::string meta = metadata("sweep", "fingerprint=" + fingerprint);
  io::write_text(a.out_csv, io::sweep_csv(result, meta));
  out << "cells: " << total << ", trained " << result.trained << ", reused " << result.reused << "\n";
  if (!result.complete) {
    out << "incomplete: " << result.rows.size() << " of " << total << " cells written to " << a.out_csv
        << "; rerun to resume\n";
    return ok;
  }
  const std::string summary = a.summary.empty() ? with_suffix(a.out_csv, ".summary.csv") : a.summary;
  const std::string plot = a.plot.empty() ? with_suffix(a.out_csv, ".gp") : a.plot;
  io::write_text(summary, io::sweep_summary_csv(result));
  io::write_text(plot, io::gnuplot_script(fs::path(summary).filename().string(), methods));
  out << "results: " << a.out_csv << "\nsummary: " << summary << "\nplot script: " << plot << "\n";
  return ok;
}

struct AblateArgs {
  Overrides ov;
  std::string config, out_csv;
  std::vector<std::string> tags;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int jobs = 1;
};

int do_ablate(const AblateArgs& a, std::ostream& out) {
  const ExperimentSpec spec = resolve(a.config, a.ov);
  const auto tags = a.tags.empty() ? all_ablations() : parse_methods(a.tags);
  require(a.jobs >= 1, "--jobs must be at least 1");
  echo_config(out, spec);
  const auto rows = ablation_grid(spec, tags, a.seeds, a.jobs);
  out << "method            mean     stddev\n";
  for (const auto& r : rows) {
    char line[96];
    std::snprintf(line, sizeof line, "%-16s  %.4f   %.4f\n", to_string(r.tag).c_str(), r.mean, r.stddev);
    out << line;
  }
  if (!a.out_csv.empty()) {
    io::write_text(a.out_csv, io::ablation_csv(rows, metadata("ablate", "eta=" + io::format_number(spec.data.eta))));
    out << "results: " << a.out_csv << "\n";
  }
  return ok;
}

struct SelftestArgs {
  bool perturb = false;
  std::uint64_t seed = verify::Options{}.seed;
};

int do_selftest(const SelftestArgs& a, std::ostream& out) {
  verify::Options opt;
  opt.seed = a.seed;
  if (a.perturb) opt.perturbation = 1e-3;
  auto checks = verify::selftest(opt);
  checks.push_back(verify::sinkhorn_marginals(50, 5, 100, opt));
  checks.push_back(verify::ema_decay(200, 0.995, opt));

  std::vector<std::string> groups;
  std::map<std::string, bool> group_ok;
  for (const auto& c : checks) {
    char line[200];
    std::snprintf(line, sizeof line, "%s  %-10s %-46s %5d cases  worst %.3g (tol %.3g)\n", c.passed ? "PASS" : "FAIL",
                  c.group.c_str(), c.name.c_str(), c.instances, c.worst, c.tolerance);
    out << line;
    if (!group_ok.count(c.group)) groups.push_back(c.group);
    group_ok.emplace(c.group, true);
    group_ok[c.group] = group_ok[c.group] && c.passed;
  }
  bool all = true;
  for (const auto& g : groups) {
    out << "group " << g << ": " << (group_ok[g] ? "pass" : "FAIL") << "\n";
    all = all && group_ok[g];
  }
  return all ? ok : verification;
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust graph matching experiments on synthetic keypoint data", "rgm"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "write a synthetic dataset");
  data_options(g, gen.ov, true);
  key_option(g, gen.ov, "--eta", "eta", "fraction of keypoints with corrupted annotations");
  key_option(g, gen.ov, "--seed", "data_seed", "dataset seed");
  g->add_option("--first-index", gen.first_index, "offset into the per-pair random streams");
  g->add_option("--config", gen.config, "key = value config file");
  g->add_option("--out", gen.out, "output dataset (JSON lines)")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "train an encoder on a dataset");
  training_options(t, tr.ov);
  key_option(t, tr.ov, "--ablation", "ablation", "loss variant");
  key_option(t, tr.ov, "--seed", "seed", "initialization and shuffling seed");
  t->add_option("--data", tr.data, "training dataset")->required();
  t->add_option("--config", tr.config, "key = value config file");
  t->add_option("--out-checkpoint", tr.checkpoint, "checkpoint to write")->required();
  t->add_option("--history", tr.history, "per-epoch history CSV (default <checkpoint>.history.csv)");
  t->add_option("--checkpoint-every", tr.checkpoint_every, "also save every k epochs")->check(CLI::NonNegativeNumber);
  t->add_option("--eval-data", tr.eval_data, "dataset evaluated after every epoch");
  t->add_option("--resume", tr.resume, "continue from this checkpoint for --epochs more epochs");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "evaluate a checkpoint");
  e->add_option("--checkpoint", ev.checkpoint, "checkpoint to load")->required();
  e->add_option("--data", ev.data, "evaluation dataset")->required();
  e->add_option("--hist-out", ev.hist_out, "write the similarity histogram as JSON");
  e->add_option("--bins", ev.bins, "histogram bins over [-1, 1]");
  e->add_flag("--teacher", ev.teacher, "use the EMA teacher instead of the student");

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "accuracy versus noise rate");
  training_options(s, sw.ov);
  data_options(s, sw.ov, false);
  key_option(s, sw.ov, "--test-pairs", "test_pairs", "clean test pairs per cell");
  s->add_option("--etas", sw.etas, "noise rates")->delimiter(',');
  s->add_option("--methods", sw.methods, "ablation tags")->delimiter(',');
  s->add_option("--seeds", sw.seeds, "seeds")->delimiter(',');
  s->add_option("--out-csv", sw.out_csv, "results CSV")->required();
  s->add_option("--summary-out", sw.summary, "seed-averaged CSV (default <out>.summary.csv)");
  s->add_option("--plot-out", sw.plot, "gnuplot script (default <out>.gp)");
  s->add_option("--config", sw.config, "key = value config file");
  s->add_option("--jobs", sw.jobs, "worker threads");
  s->add_option("--max-cells", sw.max_cells, "train at most this many new cells, then stop");
  s->add_option("--checkpoint-dir", sw.checkpoint_dir, "save each trained cell's checkpoint here");
  s->add_flag("--fresh", sw.fresh, "ignore an existing manifest");

  AblateArgs ab;
  auto* b = app.add_subcommand("ablate", "compare loss variants on one benchmark");
  training_options(b, ab.ov);
  data_options(b, ab.ov, false);
  key_option(b, ab.ov, "--test-pairs", "test_pairs", "clean test pairs");
  key_option(b, ab.ov, "--eta", "eta", "noise rate of the training split");
  b->add_option("--tags", ab.tags, "ablation tags (default: all)")->delimiter(',');
  b->add_option("--seeds", ab.seeds, "seeds")->delimiter(',');
  b->add_option("--out-csv", ab.out_csv, "results CSV");
  b->add_option("--config", ab.config, "key = value config file");
  b->add_option("--jobs", ab.jobs, "worker threads");

  SelftestArgs st;
  auto* v = app.add_subcommand("selftest", "run the embedded verification suite");
  v->add_flag("--perturb-gradient", st.perturb, "scale analytic gradients by 1.001 (the gradient group must fail)");
  v->add_option("--seed", st.seed, "seed for the random instances");

  std::vector<const char*> cargv;
  for (const auto& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex, out, err);
    return usage;
  }

  try {
    if (*g) return do_generate(gen, out);
    if (*t) return do_train(tr, out);
    if (*e) return do_eval(ev, out);
    if (*s) return do_sweep(sw, out);
    if (*b) return do_ablate(ab, out);
    if (*v) return do_selftest(st, out);
  } catch (const io::DataError& ex) {
    err << "error: " << ex.what() << "\n";
    return data;
  } catch (const ContractError& ex) {
    err << "error: " << ex.what() << "\n";
    return usage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return data;
  }
  return usage;
}

}  // namespace rgm::cli
