#include "rgm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rgm {

namespace {

Matrix encoder_inputs(const Matrix& desc, const Matrix& coords) {
  Matrix x(desc.rows(), desc.cols() + coords.cols());
  x << desc, coords;
  return x;
}

}  // namespace

Matrix similarity(const EncoderParams& params, const GraphPair& pair) {
  const Matrix p_a = forward(params, encoder_inputs(pair.desc_a, pair.coords_a));
  const Matrix p_b = forward(params, encoder_inputs(pair.desc_b, pair.coords_b));
  return p_a * p_b.transpose();
}

Assignment predict(const EncoderParams& params, const GraphPair& pair) {
  return hungarian(similarity(params, pair));
}

Evaluation evaluate(const EncoderParams& params, const std::vector<GraphPair>& dataset) {
  Evaluation ev;
  double sum = 0.0;
  for (const auto& pair : dataset) {
    if (pair.size() < 2) {
      ++ev.skipped;
      continue;
    }
    const double acc = matching_accuracy(predict(params, pair), pair.gt);
    ev.per_pair.push_back(acc);
    sum += acc;
  }
  require(!ev.per_pair.empty(), "evaluate: no pair with at least two keypoints");
  ev.accuracy = sum / static_cast<double>(ev.per_pair.size());
  return ev;
}

std::size_t SimilarityHistogram::clean_total() const {
  std::size_t t = 0;
  for (auto c : clean) t += c;
  return t;
}

std::size_t SimilarityHistogram::noisy_total() const {
  std::size_t t = 0;
  for (auto c : noisy) t += c;
  return t;
}

SimilarityHistogram similarity_histogram(const EncoderParams& params, const std::vector<GraphPair>& dataset,
                                         std::size_t bins) {
  require(bins >= 1, "similarity_histogram: need at least one bin");
  SimilarityHistogram h;
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = -1.0 + 2.0 * static_cast<double>(b) / static_cast<double>(bins);
  h.clean.assign(bins, 0);
  h.noisy.assign(bins, 0);
  double clean_sum = 0.0, noisy_sum = 0.0;
  for (const auto& pair : dataset) {
    const Matrix s = similarity(params, pair);
    for (Eigen::Index i = 0; i < pair.gt.rows(); ++i) {
      const double v = s(i, pair.gt[i]);
      const double pos = (std::clamp(v, -1.0, 1.0) + 1.0) / 2.0 * static_cast<double>(bins);
      const auto bin = std::min(static_cast<std::size_t>(pos), bins - 1);  // v == 1 lands in the last bin
      if (pair.noise_flags[static_cast<std::size_t>(i)]) {
        ++h.noisy[bin];
        noisy_sum += v;
      } else {
        ++h.clean[bin];
        clean_sum += v;
      }
    }
  }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  const auto nc = h.clean_total();
  const auto nn = h.noisy_total();
  h.clean_mean = nc ? clean_sum / static_cast<double>(nc) : nan;
  h.noisy_mean = nn ? noisy_sum / static_cast<double>(nn) : nan;
  return h;
}

}  // namespace rgm
