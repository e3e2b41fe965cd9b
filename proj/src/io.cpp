#include "rgm/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace rgm::io {

using nlohmann::json;

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from(const json& j, Eigen::Index cols_if_empty = 0) {
  if (!j.is_array()) throw DataError("expected a matrix (array of rows)");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j.front().size()) : cols_if_empty;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw DataError("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from(const json& j) {
  if (!j.is_array()) throw DataError("expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json field_json(const DescriptorField& f) {
  return {{"landmarks", matrix_json(f.landmarks)}, {"appearance", matrix_json(f.appearance)},
          {"frequencies", matrix_json(f.frequencies)}, {"phases", vector_json(f.phases)},
          {"style", vector_json(f.style)}, {"sigma", f.sigma},
          {"amplitude", f.amplitude}, {"background", f.background}};
}

DescriptorField field_from(const json& j) {
  DescriptorField f;
  f.landmarks = matrix_from(j.at("landmarks"), 2);
  f.appearance = matrix_from(j.at("appearance"));
  f.frequencies = matrix_from(j.at("frequencies"), 2);
  f.phases = vector_from(j.at("phases"));
  f.style = vector_from(j.at("style"));
  f.sigma = j.at("sigma").get<double>();
  f.amplitude = j.at("amplitude").get<double>();
  f.background = j.at("background").get<double>();
  return f;
}

void check_version(const json& j, const char* what) {
  if (!j.contains("format_version")) throw DataError(std::string(what) + ": missing format_version");
  const int v = j.at("format_version").get<int>();
  if (v != kFormatVersion)
    throw DataError(std::string(what) + ": unsupported format_version " + std::to_string(v));
}

const char* activation_name(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation activation_from(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw DataError("unknown activation '" + s + "'");
}

const char* confidence_name(ConfidenceMode m) { return m == ConfidenceMode::softmax ? "softmax" : "ratio"; }

ConfidenceMode confidence_from(const std::string& s) {
  if (s == "softmax") return ConfidenceMode::softmax;
  if (s == "ratio") return ConfidenceMode::ratio;
  throw ContractError("unknown confidence mode '" + s + "'");
}

json params_json(const EncoderParams& p) {
  json dims = json::array();
  for (auto d : p.dims()) dims.push_back(d);
  return {{"activation", activation_name(p.activation)}, {"dims", dims}, {"values", vector_json(flatten(p.layers))}};
}

EncoderParams params_from(const json& j) {
  EncoderParams p;
  p.activation = activation_from(j.at("activation").get<std::string>());
  const auto dims = j.at("dims").get<std::vector<Eigen::Index>>();
  if (dims.size() < 2) throw DataError("checkpoint: need at least two layer dims");
  for (std::size_t l = 0; l + 1 < dims.size(); ++l)
    p.layers.push_back({Matrix::Zero(dims[l], dims[l + 1]), Vector::Zero(dims[l + 1])});
  const Vector values = vector_from(j.at("values"));
  if (values.size() != p.parameter_count()) throw DataError("checkpoint: value count does not match dims");
  unflatten(p.layers, values);
  return p;
}

json nullable(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double number_or_nan(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

json history_json(const std::vector<EpochSummary>& history) {
  json a = json::array();
  for (const auto& e : history)
    a.push_back({{"epoch", e.epoch}, {"loss", nullable(e.loss)}, {"infonce", nullable(e.infonce)},
                 {"within", nullable(e.within)}, {"cross", nullable(e.cross)}, {"alpha", nullable(e.alpha)},
                 {"accuracy", nullable(e.accuracy)}});
  return a;
}

std::vector<EpochSummary> history_from(const json& j) {
  std::vector<EpochSummary> out;
  for (const auto& e : j) {
    EpochSummary s;
    s.epoch = e.at("epoch").get<int>();
    s.loss = number_or_nan(e.at("loss"));
    s.infonce = number_or_nan(e.at("infonce"));
    s.within = number_or_nan(e.at("within"));
    s.cross = number_or_nan(e.at("cross"));
    s.alpha = number_or_nan(e.at("alpha"));
    s.accuracy = number_or_nan(e.at("accuracy"));
    out.push_back(s);
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ContractError("config: '" + key + "' expects a number, got '" + v + "'");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ContractError("config: '" + key + "' expects an integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ContractError("config: '" + key + "' expects true/false, got '" + v + "'");
}

}  // namespace

std::string pair_to_json(const GraphPair& pair) {
  json gt = json::array();
  for (auto c : pair.gt.columns()) gt.push_back(c);
  json flags = json::array();
  for (bool f : pair.noise_flags) flags.push_back(f ? 1 : 0);
  const json j = {{"format_version", kFormatVersion},
                  {"category", pair.category},
                  {"coords_a", matrix_json(pair.coords_a)},
                  {"coords_b", matrix_json(pair.coords_b)},
                  {"desc_a", matrix_json(pair.desc_a)},
                  {"desc_b", matrix_json(pair.desc_b)},
                  {"gt", gt},
                  {"gt_cols", pair.gt.cols()},
                  {"noise_flags", flags},
                  {"jitter", pair.jitter},
                  {"clutter_dims", pair.clutter_dims},
                  {"clutter", pair.clutter},
                  {"field_a", field_json(pair.field_a)},
                  {"field_b", field_json(pair.field_b)}};
  return j.dump();
}

GraphPair pair_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("dataset: invalid JSON: ") + e.what());
  }
  check_version(j, "dataset record");
  try {
    GraphPair p;
    p.category = j.at("category").get<std::string>();
    p.coords_a = matrix_from(j.at("coords_a"), 2);
    p.coords_b = matrix_from(j.at("coords_b"), 2);
    p.desc_a = matrix_from(j.at("desc_a"));
    p.desc_b = matrix_from(j.at("desc_b"));
    p.gt = Assignment::from_columns(j.at("gt").get<std::vector<Eigen::Index>>(), j.at("gt_cols").get<Eigen::Index>());
    for (int f : j.at("noise_flags").get<std::vector<int>>()) p.noise_flags.push_back(f != 0);
    p.jitter = j.at("jitter").get<double>();
    p.clutter_dims = j.at("clutter_dims").get<Eigen::Index>();
    p.clutter = j.at("clutter").get<double>();
    p.field_a = field_from(j.at("field_a"));
    p.field_b = field_from(j.at("field_b"));
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw DataError(std::string("dataset: malformed record: ") + e.what());
  } catch (const ContractError& e) {
    throw DataError(std::string("dataset: invalid record: ") + e.what());
  }
}

void write_dataset(const std::filesystem::path& path, const std::vector<GraphPair>& pairs) {
  std::string text;
  for (const auto& p : pairs) text += pair_to_json(p) + "\n";
  write_text(path, text);
}

std::vector<GraphPair> read_dataset(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<GraphPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(pair_from_json(line));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (out.empty()) throw DataError(path.string() + ": dataset is empty");
  for (const auto& p : out)
    if (p.desc_a.cols() != out.front().desc_a.cols())
      throw DataError(path.string() + ": pairs disagree on descriptor dimension");
  return out;
}

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  ExperimentSpec spec;
  spec.train = ckpt.config;
  const json j = {{"format_version", kFormatVersion},
                  {"kind", "rgm-checkpoint"},
                  {"epochs_done", ckpt.epochs_done},
                  {"step", ckpt.state.step},
                  {"student", params_json(ckpt.state.student)},
                  {"teacher", params_json(ckpt.state.teacher)},
                  {"adam_first", vector_json(ckpt.state.moments.first)},
                  {"adam_second", vector_json(ckpt.state.moments.second)},
                  {"history", history_json(ckpt.state.history)},
                  {"config", format_config(spec)}};
  return j.dump(1);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  check_version(j, "checkpoint");
  try {
    Checkpoint c;
    c.epochs_done = j.at("epochs_done").get<int>();
    c.state.step = j.at("step").get<std::int64_t>();
    c.state.student = params_from(j.at("student"));
    c.state.teacher = params_from(j.at("teacher"));
    c.state.moments.first = vector_from(j.at("adam_first"));
    c.state.moments.second = vector_from(j.at("adam_second"));
    c.state.history = history_from(j.at("history"));
    if (c.state.moments.first.size() != c.state.student.parameter_count() ||
        c.state.moments.second.size() != c.state.student.parameter_count())
      throw DataError("checkpoint: Adam moments do not match the student");
    if (!same_shape(c.state.student.layers, c.state.teacher.layers))
      throw DataError("checkpoint: teacher and student shapes differ");
    ExperimentSpec spec;
    apply_config(j.at("config").get<std::string>(), spec);
    c.config = spec.train;
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: malformed: ") + e.what());
  } catch (const ContractError& e) {
    throw DataError(std::string("checkpoint: invalid: ") + e.what());
  }
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_text(path, checkpoint_to_json(ckpt) + "\n");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) { return checkpoint_from_json(read_text(path)); }

void apply_config_entry(const std::string& key, const std::string& value, ExperimentSpec& spec) {
  TrainConfig& t = spec.train;
  DatasetSpec& d = spec.data;
  SyntheticConfig& v = spec.data.view;
  const std::string& s = value;
  if (key == "learning_rate") t.learning_rate = parse_double(key, s);
  else if (key == "batch_size") t.batch_size = parse_int(key, s);
  else if (key == "epochs") t.epochs = static_cast<int>(parse_int(key, s));
  else if (key == "momentum_t") t.momentum_t = parse_double(key, s);
  else if (key == "alpha_max") t.alpha_max = parse_double(key, s);
  else if (key == "tau") t.tau = parse_double(key, s);
  else if (key == "seed") t.seed = static_cast<std::uint64_t>(parse_int(key, s));
  else if (key == "ablation") t.ablation = parse_ablation(s);
  else if (key == "hidden") {
    t.hidden.clear();
    if (!s.empty())
      for (const auto& part : split(s, ',')) t.hidden.push_back(parse_int(key, part));
  }
  else if (key == "embedding_dim") t.embedding_dim = parse_int(key, s);
  else if (key == "within_weight") t.within_weight = parse_double(key, s);
  else if (key == "cross_weight") t.cross_weight = parse_double(key, s);
  else if (key == "normalize_consistency") t.normalize_consistency = parse_bool(key, s);
  else if (key == "confidence") t.confidence = confidence_from(s);
  else if (key == "eval_teacher") t.eval_teacher = parse_bool(key, s);
  else if (key == "train_pairs") d.pairs = parse_int(key, s);
  else if (key == "test_pairs") spec.test_pairs = parse_int(key, s);
  else if (key == "keypoints") d.keypoints = parse_int(key, s);
  else if (key == "categories") d.categories = parse_int(key, s);
  else if (key == "jitter") d.jitter = parse_double(key, s);
  else if (key == "eta") d.eta = parse_double(key, s);
  else if (key == "data_seed") d.seed = static_cast<std::uint64_t>(parse_int(key, s));
  else if (key == "both_sides") d.both_sides = parse_bool(key, s);
  else if (key == "descriptor_dim") v.descriptor_dim = parse_int(key, s);
  else if (key == "clutter_dims") v.clutter_dims = parse_int(key, s);
  else if (key == "clutter") v.clutter = parse_double(key, s);
  else if (key == "layout_extent") v.layout_extent = parse_double(key, s);
  else if (key == "min_separation") v.min_separation = parse_double(key, s);
  else if (key == "field_sigma") v.field_sigma = parse_double(key, s);
  else if (key == "field_amplitude") v.field_amplitude = parse_double(key, s);
  else if (key == "field_background") v.field_background = parse_double(key, s);
  else if (key == "rotation_deg") v.rotation_deg = parse_double(key, s);
  else if (key == "scale_jitter") v.scale_jitter = parse_double(key, s);
  else if (key == "translation") v.translation = parse_double(key, s);
  else if (key == "style") v.style = parse_double(key, s);
  else throw ContractError("config: unknown key '" + key + "'");
}

void apply_config(const std::string& text, ExperimentSpec& spec) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ContractError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    apply_config_entry(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), spec);
  }
}

ExperimentSpec read_config(const std::filesystem::path& path, ExperimentSpec base) {
  apply_config(read_text(path), base);
  return base;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string format_config(const ExperimentSpec& spec) {
  const TrainConfig& t = spec.train;
  const DatasetSpec& d = spec.data;
  const SyntheticConfig& v = spec.data.view;
  std::string hidden;
  for (std::size_t i = 0; i < t.hidden.size(); ++i) hidden += (i ? "," : "") + std::to_string(t.hidden[i]);
  auto b = [](bool x) { return std::string(x ? "true" : "false"); };
  std::ostringstream o;
  o << "# training\n"
    << "learning_rate = " << format_number(t.learning_rate) << "\n"
    << "batch_size = " << t.batch_size << "\n"
    << "epochs = " << t.epochs << "\n"
    << "momentum_t = " << format_number(t.momentum_t) << "\n"
    << "alpha_max = " << format_number(t.alpha_max) << "\n"
    << "tau = " << format_number(t.tau) << "\n"
    << "seed = " << t.seed << "\n"
    << "ablation = " << to_string(t.ablation) << "\n"
    << "hidden = " << hidden << "\n"
    << "embedding_dim = " << t.embedding_dim << "\n"
    << "within_weight = " << format_number(t.within_weight) << "\n"
    << "cross_weight = " << format_number(t.cross_weight) << "\n"
    << "normalize_consistency = " << b(t.normalize_consistency) << "\n"
    << "confidence = " << confidence_name(t.confidence) << "\n"
    << "eval_teacher = " << b(t.eval_teacher) << "\n"
    << "# data\n"
    << "train_pairs = " << d.pairs << "\n"
    << "test_pairs = " << spec.test_pairs << "\n"
    << "keypoints = " << d.keypoints << "\n"
    << "categories = " << d.categories << "\n"
    << "jitter = " << format_number(d.jitter) << "\n"
    << "eta = " << format_number(d.eta) << "\n"
    << "data_seed = " << d.seed << "\n"
    << "both_sides = " << b(d.both_sides) << "\n"
    << "descriptor_dim = " << v.descriptor_dim << "\n"
    << "clutter_dims = " << v.clutter_dims << "\n"
    << "clutter = " << format_number(v.clutter) << "\n"
    << "layout_extent = " << format_number(v.layout_extent) << "\n"
    << "min_separation = " << format_number(v.min_separation) << "\n"
    << "field_sigma = " << format_number(v.field_sigma) << "\n"
    << "field_amplitude = " << format_number(v.field_amplitude) << "\n"
    << "field_background = " << format_number(v.field_background) << "\n"
    << "rotation_deg = " << format_number(v.rotation_deg) << "\n"
    << "scale_jitter = " << format_number(v.scale_jitter) << "\n"
    << "translation = " << format_number(v.translation) << "\n"
    << "style = " << format_number(v.style) << "\n";
  return o.str();
}

std::string sweep_row_csv(const SweepRow& r) {
  return format_number(r.eta) + "," + to_string(r.method) + "," + std::to_string(r.seed) + "," +
         format_number(r.accuracy) + "," + format_number(r.mean_clean_sim) + "," + format_number(r.mean_noisy_sim);
}

SweepRow sweep_row_from_csv(const std::string& line) {
  const auto f = split(line, ',');
  if (f.size() != 6) throw DataError("sweep row: expected 6 fields in '" + line + "'");
  try {
    SweepRow r;
    r.eta = std::stod(f[0]);
    r.method = parse_ablation(f[1]);
    r.seed = std::stoull(f[2]);
    r.accuracy = std::stod(f[3]);
    r.mean_clean_sim = std::stod(f[4]);
    r.mean_noisy_sim = std::stod(f[5]);
    return r;
  } catch (const std::exception& e) {
    throw DataError("sweep row: cannot parse '" + line + "': " + e.what());
  }
}

std::string sweep_csv(const SweepResult& result, const std::string& metadata) {
  std::string out = "# " + metadata + "\n" + kSweepHeader + "\n";
  for (const auto& r : result.rows) out += sweep_row_csv(r) + "\n";
  return out;
}

std::string sweep_summary_csv(const SweepResult& result) {
  // Keep first-seen order of (eta, method).
  std::vector<std::pair<double, Ablation>> keys;
  std::map<std::pair<double, int>, std::vector<double>> acc;
  for (const auto& r : result.rows) {
    const auto k = std::make_pair(r.eta, static_cast<int>(r.method));
    if (!acc.count(k)) keys.emplace_back(r.eta, r.method);
    acc[k].push_back(r.accuracy);
  }
  std::string out = "eta,method,mean_accuracy,stddev,seeds\n";
  for (const auto& [eta, m] : keys) {
    const auto& v = acc[{eta, static_cast<int>(m)}];
    out += format_number(eta) + "," + to_string(m) + "," + format_number(mean(v)) + "," +
           format_number(sample_stddev(v)) + "," + std::to_string(v.size()) + "\n";
  }
  return out;
}

std::string gnuplot_script(const std::string& summary_csv_path, const std::vector<Ablation>& methods) {
  std::ostringstream o;
  o << "# Accuracy versus noise rate, one line per method.\n"
    << "set datafile separator ','\n"
    << "set key autotitle columnhead\n"
    << "set xlabel 'noise rate'\n"
    << "set ylabel 'matching accuracy'\n"
    << "set yrange [0:1]\n"
    << "plot ";
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const auto name = to_string(methods[i]);
    o << (i ? ", \\\n     " : "") << "'" << summary_csv_path << "' using 1:(strcol(2) eq '" << name
      << "' ? $3 : NaN) with linespoints title '" << name << "'";
  }
  o << "\n";
  return o.str();
}

std::string sweep_fingerprint(const ExperimentSpec& spec) {
  ExperimentSpec norm = spec;
  norm.data.eta = 0.0;
  norm.data.seed = 0;
  norm.train.seed = 0;
  norm.train.ablation = Ablation::full;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : format_config(norm)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string manifest_header(const std::string& fingerprint) {
  return "# rgm sweep manifest format_version=" + std::to_string(kFormatVersion) + " fingerprint=" + fingerprint + "\n";
}

Manifest read_manifest(const std::filesystem::path& path) {
  Manifest m;
  if (!std::filesystem::exists(path)) return m;
  const std::string text = read_text(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# rgm sweep manifest", 0) != 0)
    throw DataError(path.string() + ": not a sweep manifest");
  if (line.find("format_version=" + std::to_string(kFormatVersion)) == std::string::npos)
    throw DataError(path.string() + ": unsupported manifest version");
  const auto at = line.find("fingerprint=");
  if (at == std::string::npos) throw DataError(path.string() + ": manifest has no fingerprint");
  m.fingerprint = trim(line.substr(at + 12));
  const bool ends_clean = !text.empty() && text.back() == '\n';
  std::vector<std::string> lines;
  while (std::getline(in, line))
    if (!trim(line).empty()) lines.push_back(line);
  if (!ends_clean && !lines.empty()) lines.pop_back();
  for (const auto& l : lines) m.rows.push_back(sweep_row_from_csv(l));
  return m;
}

std::string history_csv(const TrainState& state, const std::string& metadata) {
  std::string out = "# " + metadata + "\nepoch,loss,infonce,within,cross,alpha,accuracy\n";
  for (const auto& e : state.history) {
    out += std::to_string(e.epoch) + "," + format_number(e.loss) + "," + format_number(e.infonce) + "," +
           format_number(e.within) + "," + format_number(e.cross) + "," + format_number(e.alpha) + "," +
           format_number(e.accuracy) + "\n";
  }
  return out;
}

std::string histogram_json(const SimilarityHistogram& h) {
  const json j = {{"format_version", kFormatVersion}, {"edges", h.edges},
                  {"clean", h.clean},                 {"noisy", h.noisy},
                  {"clean_mean", nullable(h.clean_mean)},  {"noisy_mean", nullable(h.noisy_mean)}};
  return j.dump(1);
}

std::string ablation_csv(const std::vector<AblationRow>& rows, const std::string& metadata) {
  std::string out = "# " + metadata + "\nmethod,mean_accuracy,stddev,accuracies\n";
  for (const auto& r : rows) {
    std::string per;
    for (std::size_t i = 0; i < r.accuracies.size(); ++i) per += (i ? ";" : "") + format_number(r.accuracies[i]);
    out += to_string(r.tag) + "," + format_number(r.mean) + "," + format_number(r.stddev) + "," + per + "\n";
  }
  return out;
}

std::string csv_body(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') out += line + "\n";
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace rgm::io
