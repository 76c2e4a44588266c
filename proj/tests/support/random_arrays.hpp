#pragma once

#include <random>

#include "hoigaze/nd/ndarray.hpp"

namespace hoigaze::testing {

inline nd::NdArray random_array(nd::Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  nd::NdArray out(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& v : out.data()) v = dist(rng);
  return out;
}

}  // namespace hoigaze::testing
