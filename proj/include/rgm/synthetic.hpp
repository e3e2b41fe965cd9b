#pragma once

#include "rgm/assignment.hpp"
#include "rgm/core.hpp"
#include "rgm/rng.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace rgm {

/// Appearance as a function of location in one view.
///
/// The noiseless descriptor at x is a Gaussian-weighted blend of the landmark
/// appearance vectors around x (with a constant background weight), plus a
/// smooth sinusoidal term in x and a per-view style offset. Moving a keypoint
/// away from its landmark therefore changes what it looks like.
struct DescriptorField {
  Matrix landmarks;    // k x 2, view coordinates
  Matrix appearance;   // k x d
  Matrix frequencies;  // d x 2
  Vector phases;       // d
  Vector style;        // d
  double sigma = 0.06;
  double amplitude = 0.3;
  double background = 0.05;

  Eigen::Index dim() const { return appearance.cols(); }
  Vector sample(double x, double y) const;
};

/// Shape and appearance template shared by every instance of a category.
struct CategoryPrototype {
  std::string label;
  Matrix layout;       // k x 2 landmark positions around the box center
  Matrix appearance;   // k x d, unit rows
  Matrix frequencies;  // d x 2
  Vector phases;       // d
};

/// Knobs of the view model. Defaults define the benchmark used in the tests.
struct SyntheticConfig {
  Eigen::Index descriptor_dim = 24;
  double layout_extent = 0.15;  // landmarks ~ U(0.5 - e, 0.5 + e)^2
  double min_separation = 0.06;
  double field_sigma = 0.02;
  double field_amplitude = 0.3;
  double field_background = 0.0;
  double rotation_deg = 15.0;   // per-view rotation ~ U(-r, r)
  double scale_jitter = 0.1;    // per-axis scale ~ U(1 - s, 1 + s)
  double translation = 0.05;    // per-axis shift ~ U(-t, t)
  double style = 0.5;           // per-view style offset norm
  Eigen::Index clutter_dims = 8;  // trailing descriptor channels with no identity
  double clutter = 0.8;           // per-keypoint noise std on those channels
};

struct GraphPair {
  Matrix coords_a, coords_b;  // n x 2 and m x 2, in [0, 1]^2
  Matrix desc_a, desc_b;      // n x d and m x d
  Assignment gt;              // n x m
  std::vector<bool> noise_flags;
  std::string category;
  double jitter = 0.0;
  Eigen::Index clutter_dims = 0;
  double clutter = 0.0;
  DescriptorField field_a, field_b;

  Eigen::Index size() const { return coords_a.rows(); }
  std::size_t noise_count() const;
  void validate() const;
  bool operator==(const GraphPair& other) const;
};

struct NoiseConfig {
  double eta = 0.0;
  double s_min = 0.1;
  double s_max = 0.2;
  std::uint64_t seed = 0;
  bool both_sides = false;

  void validate() const;
};

CategoryPrototype make_category(std::string label, Eigen::Index landmarks, std::uint64_t seed,
                                const SyntheticConfig& config = {});

/// Two independently perturbed views of n landmarks of `prototype`; gt is the identity.
GraphPair generate_pair(Eigen::Index n, const CategoryPrototype& prototype, double jitter, std::uint64_t seed,
                        const SyntheticConfig& config = {});

/// Polar displacement (s, theta) with s ~ U(s_min, s_max), theta ~ U(0, 2 pi).
Eigen::Vector2d sample_displacement(Rng& rng, const NoiseConfig& cfg);

/// Displaces floor(eta * n) keypoints, re-samples their descriptors from the
/// descriptor field at the new location, and flags them. gt is left as is.
GraphPair inject_noise(const GraphPair& pair, const NoiseConfig& cfg);

/// Encoder inputs (descriptor | coordinates) with B reordered so row i of
/// both outputs is the annotated correspondence.
std::pair<Matrix, Matrix> align_keypoints(const GraphPair& pair);

struct DatasetSpec {
  Eigen::Index pairs = 200;
  Eigen::Index first_index = 0;  // offset into the per-pair RNG streams
  Eigen::Index keypoints = 10;
  Eigen::Index categories = 5;
  double jitter = 0.3;
  double eta = 0.0;
  std::uint64_t seed = 0;
  bool both_sides = false;
  SyntheticConfig view;
};

/// Category templates are a function of (seed, category index) only, so
/// datasets drawn with the same seed share categories.
std::vector<CategoryPrototype> make_categories(const DatasetSpec& spec);

/// Round-robin over categories; pair i uses an RNG stream derived from
/// (seed, first_index + i).
std::vector<GraphPair> generate_dataset(const DatasetSpec& spec);

/// Train split (noise injected at spec.eta) and a disjoint clean test split
/// over the same categories.
struct Benchmark {
  std::vector<GraphPair> train;
  std::vector<GraphPair> test;
};
Benchmark make_benchmark(const DatasetSpec& train_spec, Eigen::Index test_pairs);

}  // namespace rgm
