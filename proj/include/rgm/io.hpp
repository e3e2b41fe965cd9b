#pragma once

#include "rgm/experiment.hpp"
#include "rgm/inference.hpp"
#include "rgm/synthetic.hpp"
#include "rgm/trainer.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace rgm::io {

inline constexpr int kFormatVersion = 1;

/// Malformed or unreadable input files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dataset: JSON lines, one GraphPair per line, each carrying format_version.
std::string pair_to_json(const GraphPair& pair);
GraphPair pair_from_json(const std::string& line);
void write_dataset(const std::filesystem::path& path, const std::vector<GraphPair>& pairs);
std::vector<GraphPair> read_dataset(const std::filesystem::path& path);

// Checkpoint: a single JSON document with layer dims and flattened values for
// student, teacher and Adam moments. Doubles round-trip exactly.
struct Checkpoint {
  TrainState state;
  TrainConfig config;
  int epochs_done = 0;
};
std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Config: `key = value` lines, `#` comments. Every ExperimentSpec field has a key.
void apply_config(const std::string& text, ExperimentSpec& spec);
void apply_config_entry(const std::string& key, const std::string& value, ExperimentSpec& spec);
ExperimentSpec read_config(const std::filesystem::path& path, ExperimentSpec base = {});
std::string format_config(const ExperimentSpec& spec);

/// Deterministic number formatting shared by every text output.
std::string format_number(double v);

// Sweep CSV. The first line is a `#` metadata line; the rest is the body.
inline constexpr const char* kSweepHeader = "eta,method,seed,accuracy,mean_clean_sim,mean_noisy_sim";
std::string sweep_row_csv(const SweepRow& row);
SweepRow sweep_row_from_csv(const std::string& line);
std::string sweep_csv(const SweepResult& result, const std::string& metadata);
/// Seed-averaged accuracy per (eta, method): eta,method,mean_accuracy,stddev,seeds
std::string sweep_summary_csv(const SweepResult& result);
std::string gnuplot_script(const std::string& summary_csv_path, const std::vector<Ablation>& methods);

// Sweep manifest: a header naming the config fingerprint, then one sweep row
// per completed cell in completion order. Lets an interrupted sweep resume.
/// Hash of every setting that affects a cell, excluding the per-cell eta,
/// method and seed.
std::string sweep_fingerprint(const ExperimentSpec& spec);
std::string manifest_header(const std::string& fingerprint);
struct Manifest {
  std::string fingerprint;
  std::vector<SweepRow> rows;
};
/// Missing file gives an empty manifest. A truncated last line is dropped.
Manifest read_manifest(const std::filesystem::path& path);

std::string history_csv(const TrainState& state, const std::string& metadata);
std::string histogram_json(const SimilarityHistogram& h);
std::string ablation_csv(const std::vector<AblationRow>& rows, const std::string& metadata);

/// Strips `#` metadata lines, leaving the part that must be reproducible.
std::string csv_body(const std::string& csv);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace rgm::io
