#include "cli.hpp"

#include "rgm/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

using namespace rgm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("rgm_cli_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "rgm");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

std::vector<std::string> small_model() {
  return {"--epochs", "1", "--hidden", "32", "--embedding-dim", "8", "--batch-size", "4"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}).code == cli::usage);
  CHECK(run({"bogus"}).code == cli::usage);
  CHECK(run({"generate", "--out", "x.jsonl", "--no-such-flag"}).code == cli::usage);
  CHECK(run({"generate"}).code == cli::usage);
  const Result help = run({"--help"});
  CHECK(help.code == cli::ok);
  CHECK(contains(help.out, "selftest"));
}

TEST_CASE("generate") {
  TempDir dir;
  const Result clean = run({"generate", "--n-pairs", "6", "--eta", "0", "--out", dir / "clean.jsonl"});
  REQUIRE(clean.code == cli::ok);
  CHECK(contains(clean.out, "# resolved configuration"));
  CHECK(contains(clean.out, "wrote 6 pairs"));
  for (const auto& p : io::read_dataset(dir / "clean.jsonl")) CHECK(p.noise_count() == 0);

  REQUIRE(run({"generate", "--n-pairs", "5", "--seed", "7", "--out", dir / "a.jsonl"}).code == cli::ok);
  REQUIRE(run({"generate", "--n-pairs", "5", "--seed", "7", "--out", dir / "b.jsonl"}).code == cli::ok);
  CHECK(io::read_text(dir / "a.jsonl") == io::read_text(dir / "b.jsonl"));
  REQUIRE(run({"generate", "--n-pairs", "5", "--seed", "8", "--out", dir / "c.jsonl"}).code == cli::ok);
  CHECK(io::read_text(dir / "a.jsonl") != io::read_text(dir / "c.jsonl"));

  REQUIRE(run({"generate", "--n-pairs", "4", "--eta", "0.3", "--out", dir / "noisy.jsonl"}).code == cli::ok);
  for (const auto& p : io::read_dataset(dir / "noisy.jsonl")) CHECK(p.noise_count() == 3);

  CHECK(run({"generate", "--eta", "1.5", "--out", dir / "x.jsonl"}).code == cli::usage);
  CHECK(run({"generate", "--n-pairs", "two", "--out", dir / "x.jsonl"}).code == cli::usage);
  CHECK(run({"generate", "--config", dir / "missing.cfg", "--out", dir / "x.jsonl"}).code == cli::data);

  io::write_text(dir / "g.cfg", "keypoints = 6\ntrain_pairs = 3\n");
  REQUIRE(run({"generate", "--config", dir / "g.cfg", "--keypoints", "7", "--out", dir / "cfg.jsonl"}).code == cli::ok);
  const auto cfg = io::read_dataset(dir / "cfg.jsonl");
  CHECK(cfg.size() == 3);
  CHECK(cfg[0].size() == 7);
}

TEST_CASE("data directory") {
  TempDir dir;
  ::setenv("RGM_DATA_DIR", dir.path.c_str(), 1);
  const Result r = run({"generate", "--n-pairs", "2", "--out", "rel.jsonl"});
  ::unsetenv("RGM_DATA_DIR");
  CHECK(r.code == cli::ok);
  CHECK(fs::exists(dir.path / "rel.jsonl"));
}

TEST_CASE("train and eval") {
  TempDir dir;
  REQUIRE(run({"generate", "--n-pairs", "8", "--out", dir / "train.jsonl"}).code == cli::ok);
  REQUIRE(run({"generate", "--n-pairs", "4", "--seed", "3", "--out", dir / "test.jsonl"}).code == cli::ok);

  const Result t = run(concat({"train", "--data", dir / "train.jsonl", "--eval-data", dir / "test.jsonl",
                               "--ablation", "no_distill", "--out-checkpoint", dir / "m.json"},
                              small_model()));
  REQUIRE(t.code == cli::ok);
  CHECK(contains(t.out, "learning_rate = 0.0003"));
  CHECK(contains(t.out, "momentum_t = 0.995"));
  CHECK(contains(t.out, "alpha_max = 0.4"));
  CHECK(contains(t.out, "tau = 0.07"));
  CHECK(contains(t.out, "batch_size = 4"));
  CHECK(contains(t.out, "epoch 1 loss"));
  const std::string history = io::read_text(dir / "m.json.history.csv");
  CHECK(contains(history, "ablation=no_distill"));
  CHECK(contains(history, "epoch,loss"));
  CHECK(io::read_checkpoint(dir / "m.json").config.ablation == Ablation::no_distill);

  const Result zero = run({"train", "--data", dir / "train.jsonl", "--epochs", "0", "--out-checkpoint", dir / "z.json"});
  REQUIRE(zero.code == cli::ok);
  CHECK(io::read_checkpoint(dir / "z.json").state.step == 0);

  const Result e = run({"eval", "--checkpoint", dir / "m.json", "--data", dir / "test.jsonl", "--hist-out",
                        dir / "h.json"});
  REQUIRE(e.code == cli::ok);
  CHECK(contains(e.out, "accuracy: "));
  CHECK(contains(io::read_text(dir / "h.json"), "\"edges\""));
  CHECK(run({"eval", "--checkpoint", dir / "m.json", "--data", dir / "test.jsonl", "--teacher"}).code == cli::ok);

  SUBCASE("resume matches uninterrupted training") {
    auto two = small_model();
    two[1] = "2";
    REQUIRE(run(concat({"train", "--data", dir / "train.jsonl", "--out-checkpoint", dir / "full.json"}, two)).code ==
            cli::ok);
    REQUIRE(run(concat({"train", "--data", dir / "train.jsonl", "--out-checkpoint", dir / "one.json"},
                       small_model()))
                .code == cli::ok);
    REQUIRE(run(concat({"train", "--data", dir / "train.jsonl", "--resume", dir / "one.json", "--out-checkpoint",
                        dir / "two.json"},
                       small_model()))
                .code == cli::ok);
    CHECK(io::read_checkpoint(dir / "two.json").state.student == io::read_checkpoint(dir / "full.json").state.student);
  }

  CHECK(run({"train", "--data", dir / "nothing.jsonl", "--out-checkpoint", dir / "n.json"}).code == cli::data);
  io::write_text(dir / "broken.jsonl", "{\"format_version\": 1}\n");
  CHECK(run({"train", "--data", dir / "broken.jsonl", "--out-checkpoint", dir / "n.json"}).code == cli::data);
  CHECK(run({"train", "--data", dir / "train.jsonl", "--lr", "-1", "--out-checkpoint", dir / "n.json"}).code ==
        cli::usage);
  CHECK(run({"eval", "--checkpoint", dir / "missing.json", "--data", dir / "test.jsonl"}).code == cli::data);
}

TEST_CASE("sweep") {
  TempDir dir;
  const std::vector<std::string> grid{"--train-pairs", "6", "--test-pairs", "4", "--keypoints", "5"};
  auto sweep = [&](const std::string& out, std::vector<std::string> extra) {
    return run(concat(concat(concat({"sweep", "--out-csv", out}, grid), small_model()), extra));
  };

  const Result one = sweep(dir / "one.csv", {"--etas", "0.3", "--methods", "full", "--seeds", "1"});
  REQUIRE(one.code == cli::ok);
  CHECK(contains(one.out, "cells: 1, trained 1, reused 0"));
  const std::string body = io::csv_body(io::read_text(dir / "one.csv"));
  CHECK(body.rfind(std::string(io::kSweepHeader) + "\n0.3,full,1,", 0) == 0);
  CHECK(fs::exists(dir / "one.csv.summary.csv"));
  CHECK(fs::exists(dir / "one.csv.gp"));

  const std::vector<std::string> cells{"--etas", "0,0.3", "--methods", "full,no_graph", "--seeds", "2"};
  const Result partial = sweep(dir / "r.csv", concat(cells, {"--max-cells", "2"}));
  REQUIRE(partial.code == cli::ok);
  CHECK(contains(partial.out, "incomplete"));
  const Result rest = sweep(dir / "r.csv", cells);
  REQUIRE(rest.code == cli::ok);
  CHECK(contains(rest.out, "cells: 4, trained 2, reused 2"));

  const Result fresh = sweep(dir / "f.csv", concat(cells, {"--fresh", "--jobs", "2"}));
  REQUIRE(fresh.code == cli::ok);
  CHECK(contains(fresh.out, "trained 4, reused 0"));
  CHECK(io::csv_body(io::read_text(dir / "r.csv")) == io::csv_body(io::read_text(dir / "f.csv")));

  const Result changed = sweep(dir / "r.csv", concat(cells, {"--jitter", "0.2"}));
  REQUIRE(changed.code == cli::ok);
  CHECK(contains(changed.out, "starting over"));
  CHECK(contains(changed.out, "trained 4, reused 0"));

  CHECK(sweep(dir / "bad.csv", {"--methods", "nonsense"}).code == cli::usage);
}

TEST_CASE("ablate") {
  TempDir dir;
  const Result r = run(concat({"ablate", "--tags", "full,infonce_only", "--seeds", "1", "--train-pairs", "6",
                               "--test-pairs", "4", "--keypoints", "5", "--out-csv", dir / "a.csv"},
                              small_model()));
  REQUIRE(r.code == cli::ok);
  CHECK(contains(r.out, "infonce_only"));
  CHECK(contains(io::read_text(dir / "a.csv"), "method,mean_accuracy,stddev,accuracies"));
}

TEST_CASE("selftest") {
  const Result pass = run({"selftest"});
  CHECK(pass.code == cli::ok);
  CHECK(contains(pass.out, "group gradient: pass"));
  CHECK(!contains(pass.out, "FAIL"));

  const Result fail = run({"selftest", "--perturb-gradient"});
  CHECK(fail.code == cli::verification);
  CHECK(contains(fail.out, "FAIL"));
}
