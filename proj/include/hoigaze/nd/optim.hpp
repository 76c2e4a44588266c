#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hoigaze/nd/graph.hpp"

namespace hoigaze::nd {

struct AdamOptions {
  double base_lr = 0.005;
  /// Multiplicative learning-rate decay applied once per epoch.
  double decay = 0.95;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Decoupled (AdamW) weight decay. Zero gives plain Adam.
  double weight_decay = 0.0;
};

/// Adam / AdamW with a per-epoch exponential learning-rate schedule.
///
/// Moments are allocated lazily per parameter and keyed by position in the
/// parameter list, so the same list must be passed to every step().
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamOptions options = {});

  const AdamOptions& options() const noexcept { return options_; }
  std::uint64_t step_count() const noexcept { return steps_; }

  /// base_lr * decay^epoch
  double learning_rate(std::size_t epoch) const;

  /// One update from the gradients currently held in `params`.
  void step(const std::vector<Param*>& params, std::size_t epoch);

 private:
  AdamOptions options_;
  std::uint64_t steps_ = 0;
  std::vector<NdArray> first_moment_;
  std::vector<NdArray> second_moment_;
};

AdamOptimizer make_adam(double base_lr = 0.005, double decay = 0.95);
AdamOptimizer make_adamw(double base_lr = 0.005, double decay = 0.95, double weight_decay = 0.05);

}  // namespace hoigaze::nd
