#pragma once

#include "rgm/assignment.hpp"
#include "rgm/encoder.hpp"
#include "rgm/synthetic.hpp"

#include <vector>

namespace rgm {

/// Cross-graph similarity S = P_A P_B^T of the raw (unaligned) keypoints.
Matrix similarity(const EncoderParams& params, const GraphPair& pair);

/// Hungarian argmax over the encoder similarity.
Assignment predict(const EncoderParams& params, const GraphPair& pair);

struct Evaluation {
  double accuracy = 0.0;
  std::vector<double> per_pair;  // one entry per evaluated pair
  std::size_t skipped = 0;       // pairs with fewer than two keypoints
};

/// Mean matching accuracy against each pair's gt.
Evaluation evaluate(const EncoderParams& params, const std::vector<GraphPair>& dataset);

struct SimilarityHistogram {
  std::vector<double> edges;  // bins + 1 edges over [-1, 1]
  std::vector<std::size_t> clean;
  std::vector<std::size_t> noisy;
  double clean_mean = 0.0;  // NaN when the partition is empty
  double noisy_mean = 0.0;

  std::size_t clean_total() const;
  std::size_t noisy_total() const;
};

/// Diagonal similarity of every annotated correspondence, split by noise flag.
SimilarityHistogram similarity_histogram(const EncoderParams& params, const std::vector<GraphPair>& dataset,
                                         std::size_t bins);

}  // namespace rgm
