#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hoigaze/estimator/estimator.hpp"
#include "hoigaze/recognizer/recognizer.hpp"

namespace hoigaze::cli {

/// Every tunable of a run. Keys in config files use the field names below;
/// command-line flags use the same names with dashes.
struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t window = 15;
  std::size_t train_stride = 1;
  std::size_t eval_stride = 15;
  std::size_t batch = 32;
  double lr_decay = 0.95;
  std::size_t checkpoint_every = 10;

  std::size_t recognizer_epochs = 60;
  double recognizer_lr = 0.005;
  double recognizer_weight_decay = 0.05;
  std::size_t recognizer_gcn_blocks = 2;

  std::size_t estimator_epochs = 80;
  double estimator_lr = 0.005;
  std::size_t estimator_gcn_blocks = 4;
  std::size_t objects = 1;
  double cos_eh = 0.8;
  double f_eh = 4.0;
  std::string loss = "eye_head";  // eye_head | mse
  bool self_attention = true;
  bool cross_attention = true;
  bool use_gt_attended = false;

  /// Sets one key from text. Throws ConfigError for unknown keys or
  /// unparsable values.
  void set(const std::string& key, const std::string& value);

  /// Reads `key = value` lines; `#` starts a comment.
  void load_file(const std::filesystem::path& path);

  /// Range checks across fields. Throws ConfigError.
  void validate() const;

  /// `key = value` for every field, in declaration order.
  std::vector<std::string> resolved_lines() const;

  recognizer::RecognizerConfig recognizer_model(std::size_t joints) const;
  recognizer::RecognizerTrainConfig recognizer_training() const;
  estimator::EstimatorConfig estimator_model(std::size_t joints) const;
  estimator::EstimatorTrainConfig estimator_training() const;

  static const std::vector<std::string>& keys();
};

}  // namespace hoigaze::cli
