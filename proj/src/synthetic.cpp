#include "rgm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rgm {

namespace {

constexpr std::uint64_t kCategoryStream = 0x43415447ULL << 32;  // keeps category streams apart from pairs

Vector random_unit(Rng& rng, Eigen::Index d) {
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = rng.normal();
  return v / v.norm();
}

// Isotropic jitter with expected norm ~jitter, plus clutter on the trailing channels.
Vector descriptor_noise(Rng& rng, Eigen::Index d, double jitter, Eigen::Index clutter_dims, double clutter) {
  Vector v = Vector::Zero(d);
  if (jitter > 0.0) {
    const double sd = jitter / std::sqrt(static_cast<double>(d));
    for (Eigen::Index i = 0; i < d; ++i) v(i) = sd * rng.normal();
  }
  if (clutter > 0.0)
    for (Eigen::Index i = d - clutter_dims; i < d; ++i) v(i) += clutter * rng.normal();
  return v;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

Vector DescriptorField::sample(double x, double y) const {
  const Eigen::Index k = landmarks.rows();
  // Blend weights are a softmax over -d^2 / (2 sigma^2), with the background
  // as one extra logit; evaluated max-subtracted so small sigma is safe.
  Vector logits(k + 1);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double dx = x - landmarks(i, 0);
    const double dy = y - landmarks(i, 1);
    logits(i) = -(dx * dx + dy * dy) / (2.0 * sigma * sigma);
  }
  logits(k) = background > 0.0 ? std::log(background) : -std::numeric_limits<double>::infinity();
  const double mx = logits.maxCoeff();
  const Vector w = (logits.array() - mx).exp().matrix();
  Vector mix = appearance.transpose() * w.head(k);
  mix /= w.sum();
  for (Eigen::Index j = 0; j < dim(); ++j) {
    const double arg = 2.0 * std::numbers::pi * (frequencies(j, 0) * x + frequencies(j, 1) * y) + phases(j);
    mix(j) += amplitude * std::sin(arg);
  }
  return mix + style;
}

std::size_t GraphPair::noise_count() const {
  return static_cast<std::size_t>(std::count(noise_flags.begin(), noise_flags.end(), true));
}

void GraphPair::validate() const {
  const Eigen::Index n = coords_a.rows();
  const Eigen::Index m = coords_b.rows();
  require(n >= 1, "GraphPair: empty");
  require(coords_a.cols() == 2 && coords_b.cols() == 2, "GraphPair: coordinates must have two columns");
  require(desc_a.rows() == n && desc_b.rows() == m, "GraphPair: descriptor rows must match keypoints");
  require(desc_a.cols() == desc_b.cols(), "GraphPair: descriptor dims differ");
  require(gt.rows() == n && gt.cols() == m, "GraphPair: ground truth must be n x m");
  require(noise_flags.size() == static_cast<std::size_t>(n), "GraphPair: noise flags must have length n");
  auto in_box = [](const Matrix& c) { return (c.array() >= 0.0).all() && (c.array() <= 1.0).all(); };
  require(in_box(coords_a) && in_box(coords_b), "GraphPair: coordinates outside the unit box");
}

bool GraphPair::operator==(const GraphPair& o) const {
  auto field_eq = [](const DescriptorField& a, const DescriptorField& b) {
    return a.landmarks == b.landmarks && a.appearance == b.appearance && a.frequencies == b.frequencies &&
           a.phases == b.phases && a.style == b.style && a.sigma == b.sigma && a.amplitude == b.amplitude &&
           a.background == b.background;
  };
  return coords_a == o.coords_a && coords_b == o.coords_b && desc_a == o.desc_a && desc_b == o.desc_b &&
         gt == o.gt && noise_flags == o.noise_flags && category == o.category && jitter == o.jitter &&
         clutter_dims == o.clutter_dims && clutter == o.clutter &&
         field_eq(field_a, o.field_a) && field_eq(field_b, o.field_b);
}

void NoiseConfig::validate() const {
  require(eta >= 0.0 && eta <= 1.0, "NoiseConfig: eta must be in [0, 1]");
  require(s_min >= 0.0 && s_min <= s_max, "NoiseConfig: need 0 <= s_min <= s_max");
}

CategoryPrototype make_category(std::string label, Eigen::Index landmarks, std::uint64_t seed,
                                const SyntheticConfig& config) {
  require(landmarks >= 1, "make_category: need at least one landmark");
  Rng rng(seed);
  CategoryPrototype cat;
  cat.label = std::move(label);
  cat.layout.resize(landmarks, 2);
  // Rejection sampling with a separation floor that relaxes if the box gets crowded.
  double min_sep = config.min_separation;
  const double lo = 0.5 - config.layout_extent;
  const double hi = 0.5 + config.layout_extent;
  for (Eigen::Index i = 0; i < landmarks; ++i) {
    for (int attempt = 0;; ++attempt) {
      const double x = rng.uniform(lo, hi);
      const double y = rng.uniform(lo, hi);
      bool ok = true;
      for (Eigen::Index j = 0; j < i && ok; ++j) ok = std::hypot(x - cat.layout(j, 0), y - cat.layout(j, 1)) >= min_sep;
      if (ok) {
        cat.layout(i, 0) = x;
        cat.layout(i, 1) = y;
        break;
      }
      if (attempt > 200) {
        min_sep *= 0.9;
        attempt = 0;
      }
    }
  }
  const Eigen::Index d = config.descriptor_dim;
  require(config.clutter_dims >= 0 && config.clutter_dims < d, "make_category: clutter_dims must leave identity channels");
  const Eigen::Index identity_dims = d - config.clutter_dims;
  cat.appearance = Matrix::Zero(landmarks, d);
  for (Eigen::Index i = 0; i < landmarks; ++i)
    cat.appearance.row(i).head(identity_dims) = random_unit(rng, identity_dims).transpose();
  cat.frequencies.resize(d, 2);
  cat.phases.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    cat.frequencies(j, 0) = rng.uniform(-2.0, 2.0);
    cat.frequencies(j, 1) = rng.uniform(-2.0, 2.0);
    cat.phases(j) = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  return cat;
}

namespace {

DescriptorField make_view(const CategoryPrototype& cat, Rng& rng, const SyntheticConfig& config) {
  const double angle = rng.uniform(-config.rotation_deg, config.rotation_deg) * std::numbers::pi / 180.0;
  const double sx = rng.uniform(1.0 - config.scale_jitter, 1.0 + config.scale_jitter);
  const double sy = rng.uniform(1.0 - config.scale_jitter, 1.0 + config.scale_jitter);
  const double tx = rng.uniform(-config.translation, config.translation);
  const double ty = rng.uniform(-config.translation, config.translation);
  Eigen::Matrix2d rot;
  rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  const Eigen::Matrix2d affine = rot * Eigen::Vector2d(sx, sy).asDiagonal();

  DescriptorField f;
  // The field keeps every landmark of the category, so displaced keypoints
  // can pick up the appearance of parts that were not selected.
  f.landmarks.resize(cat.layout.rows(), 2);
  for (Eigen::Index i = 0; i < cat.layout.rows(); ++i) {
    const Eigen::Vector2d p = affine * (cat.layout.row(i).transpose() - Eigen::Vector2d(0.5, 0.5)) +
                              Eigen::Vector2d(0.5 + tx, 0.5 + ty);
    f.landmarks(i, 0) = clamp01(p.x());
    f.landmarks(i, 1) = clamp01(p.y());
  }
  f.appearance = cat.appearance;
  f.frequencies = cat.frequencies;
  f.phases = cat.phases;
  f.style = config.style > 0.0 ? Vector(config.style * random_unit(rng, cat.appearance.cols()))
                               : Vector(Vector::Zero(cat.appearance.cols()));
  f.sigma = config.field_sigma;
  f.amplitude = config.field_amplitude;
  f.background = config.field_background;
  return f;
}

void fill_view(const DescriptorField& f, const std::vector<Eigen::Index>& chosen, const GraphPair& pair, Rng& rng,
               Matrix& coords, Matrix& desc) {
  const auto n = static_cast<Eigen::Index>(chosen.size());
  coords.resize(n, 2);
  desc.resize(n, f.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index k = chosen[static_cast<std::size_t>(i)];
    coords(i, 0) = f.landmarks(k, 0);
    coords(i, 1) = f.landmarks(k, 1);
    const Vector d = f.sample(coords(i, 0), coords(i, 1)) +
                     descriptor_noise(rng, f.dim(), pair.jitter, pair.clutter_dims, pair.clutter);
    desc.row(i) = d.transpose();
  }
}

}  // namespace

GraphPair generate_pair(Eigen::Index n, const CategoryPrototype& prototype, double jitter, std::uint64_t seed,
                        const SyntheticConfig& config) {
  require(n >= 2, "generate_pair: need at least two keypoints");
  require(n <= prototype.layout.rows(), "generate_pair: more keypoints than category landmarks");
  require(jitter >= 0.0, "generate_pair: jitter must be non-negative");
  Rng rng(seed);

  std::vector<Eigen::Index> all(static_cast<std::size_t>(prototype.layout.rows()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Eigen::Index>(i);
  rng.shuffle(all);
  const std::vector<Eigen::Index> chosen(all.begin(), all.begin() + n);

  GraphPair pair;
  pair.category = prototype.label;
  pair.jitter = jitter;
  pair.clutter_dims = config.clutter_dims;
  pair.clutter = config.clutter;
  pair.field_a = make_view(prototype, rng, config);
  pair.field_b = make_view(prototype, rng, config);
  fill_view(pair.field_a, chosen, pair, rng, pair.coords_a, pair.desc_a);
  fill_view(pair.field_b, chosen, pair, rng, pair.coords_b, pair.desc_b);
  pair.gt = Assignment::identity(n);
  pair.noise_flags.assign(static_cast<std::size_t>(n), false);
  return pair;
}

Eigen::Vector2d sample_displacement(Rng& rng, const NoiseConfig& cfg) {
  const double s = rng.uniform(cfg.s_min, cfg.s_max);
  const double theta = rng.uniform(0.0, 360.0) * std::numbers::pi / 180.0;
  return {s * std::cos(theta), s * std::sin(theta)};
}

GraphPair inject_noise(const GraphPair& pair, const NoiseConfig& cfg) {
  cfg.validate();
  pair.validate();
  GraphPair out = pair;
  const Eigen::Index n = pair.size();
  const auto count = static_cast<std::size_t>(std::floor(cfg.eta * static_cast<double>(n) + 1e-9));
  if (count == 0) return out;

  Rng rng(cfg.seed);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Eigen::Index>(i);
  // Partial Fisher-Yates: the first `count` entries are a uniform sample.
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }

  // The coordinate frame is the unit bounding box, so displacements need no rescaling.
  auto displace = [&](Matrix& coords, Matrix& desc, const DescriptorField& field, Eigen::Index row) {
    const Eigen::Vector2d delta = sample_displacement(rng, cfg);
    coords(row, 0) = clamp01(coords(row, 0) + delta.x());
    coords(row, 1) = clamp01(coords(row, 1) + delta.y());
    const Vector d = field.sample(coords(row, 0), coords(row, 1)) +
                     descriptor_noise(rng, field.dim(), pair.jitter, pair.clutter_dims, pair.clutter);
    desc.row(row) = d.transpose();
  };

  for (std::size_t s = 0; s < count; ++s) {
    const Eigen::Index i = idx[s];
    displace(out.coords_a, out.desc_a, out.field_a, i);
    if (cfg.both_sides) displace(out.coords_b, out.desc_b, out.field_b, pair.gt[i]);
    out.noise_flags[static_cast<std::size_t>(i)] = true;
  }
  return out;
}

std::pair<Matrix, Matrix> align_keypoints(const GraphPair& pair) {
  const Eigen::Index n = pair.gt.rows();
  require(n > 0, "align_keypoints: no annotated correspondences");
  require(pair.desc_a.rows() == n && pair.coords_a.rows() == n, "align_keypoints: A side does not match gt rows");
  const Eigen::Index d = pair.desc_a.cols();
  Matrix a(n, d + 2), b(n, d + 2);
  a << pair.desc_a, pair.coords_a;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = pair.gt[i];
    b.row(i) << pair.desc_b.row(j), pair.coords_b.row(j);
  }
  return {a, b};
}

std::vector<CategoryPrototype> make_categories(const DatasetSpec& spec) {
  require(spec.categories >= 1, "make_categories: need at least one category");
  std::vector<CategoryPrototype> cats;
  for (Eigen::Index c = 0; c < spec.categories; ++c) {
    Rng stream = Rng::stream(spec.seed, kCategoryStream + static_cast<std::uint64_t>(c));
    cats.push_back(make_category("cat" + std::to_string(c), spec.keypoints, stream.next_u64(), spec.view));
  }
  return cats;
}

std::vector<GraphPair> generate_dataset(const DatasetSpec& spec) {
  require(spec.pairs >= 0, "generate_dataset: negative pair count");
  const auto cats = make_categories(spec);
  std::vector<GraphPair> out;
  out.reserve(static_cast<std::size_t>(spec.pairs));
  for (Eigen::Index i = 0; i < spec.pairs; ++i) {
    const auto index = static_cast<std::uint64_t>(spec.first_index + i);
    Rng stream = Rng::stream(spec.seed, index);
    const std::uint64_t pair_seed = stream.next_u64();
    const std::uint64_t noise_seed = stream.next_u64();
    const auto& cat = cats[static_cast<std::size_t>(index % static_cast<std::uint64_t>(cats.size()))];
    GraphPair pair = generate_pair(spec.keypoints, cat, spec.jitter, pair_seed, spec.view);
    if (spec.eta > 0.0) {
      NoiseConfig noise;
      noise.eta = spec.eta;
      noise.seed = noise_seed;
      noise.both_sides = spec.both_sides;
      pair = inject_noise(pair, noise);
    }
    out.push_back(std::move(pair));
  }
  return out;
}

Benchmark make_benchmark(const DatasetSpec& train_spec, Eigen::Index test_pairs) {
  Benchmark b;
  b.train = generate_dataset(train_spec);
  DatasetSpec test_spec = train_spec;
  test_spec.pairs = test_pairs;
  test_spec.first_index = train_spec.first_index + train_spec.pairs;
  test_spec.eta = 0.0;
  b.test = generate_dataset(test_spec);
  return b;
}

}  // namespace rgm
