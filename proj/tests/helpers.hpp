#pragma once

#include "rgm/core.hpp"
#include "rgm/rng.hpp"

#include <cmath>

namespace testing {

inline rgm::Matrix gaussian(rgm::Rng& rng, Eigen::Index r, Eigen::Index c) {
  rgm::Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

inline double max_abs_diff(const rgm::Matrix& a, const rgm::Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace testing
