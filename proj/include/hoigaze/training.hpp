#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "hoigaze/nd/ops.hpp"

namespace hoigaze {

/// One line of a training log. `metric` is per-frame accuracy for the
/// recogniser and mean angular error (degrees) for the estimator.
struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
  double metric = 0.0;
};

/// Called after every epoch; the model is in its post-epoch state.
using EpochCallback = std::function<void(const EpochLog&)>;

/// Shuffles 0..count-1 and cuts it into batches of at most `batch` items.
std::vector<std::vector<std::size_t>> shuffled_batches(std::size_t count, std::size_t batch, nd::Rng& rng);

}  // namespace hoigaze
