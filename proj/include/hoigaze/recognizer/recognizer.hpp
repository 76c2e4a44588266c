#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "hoigaze/data/frame.hpp"
#include "hoigaze/data/windows.hpp"
#include "hoigaze/nd/graph.hpp"
#include "hoigaze/recognizer/blocks.hpp"
#include "hoigaze/training.hpp"

namespace hoigaze::recognizer {

struct RecognizerConfig {
  std::size_t joints = 20;     // N
  std::size_t steps = 15;      // T
  std::size_t gcn_blocks = 2;  // B_r
  double dropout = kDropoutRate;
  std::uint64_t seed = 0;  // initialisation seed
};

/// Attended-hand recogniser: head CNN, one ST-GCN branch per hand and a
/// two-channel per-frame classifier. Channel 0 is Left, channel 1 Right.
class Recognizer {
 public:
  explicit Recognizer(const RecognizerConfig& config);

  struct Output {
    nd::Var head_features;   // 32 x T
    nd::Var left_features;   // 8 x (N+3) x T
    nd::Var right_features;  // 8 x (N+3) x T
    nd::Var features;        // (16(N+3) + 32) x T
    nd::Var logits;          // 2 x T
    nd::Var probs;           // 2 x T, softmax over channels
  };

  Output forward(nd::Graph& g, const data::RecognizerInputs& inputs, const ForwardContext& ctx) const;

  /// Eval-mode probabilities, 2 x T.
  nd::NdArray predict(const data::RecognizerInputs& inputs) const;
  nd::NdArray predict(const data::FrameWindow& normalized_window) const;

  const RecognizerConfig& config() const noexcept { return config_; }
  nd::ParamSet& params() noexcept { return params_; }
  const nd::ParamSet& params() const noexcept { return params_; }

  void save(const std::filesystem::path& path) const;
  static Recognizer load(const std::filesystem::path& path);

 private:
  RecognizerConfig config_;
  nd::ParamSet params_;
  HeadBranchParams head_;
  GraphBranchParams left_;
  GraphBranchParams right_;
  ConvParams fuse_conv_;
  NormParams fuse_norm_;
  ConvParams out_conv_;
};

struct AttendedPrediction {
  data::Side side = data::Side::Right;
  double confidence = 0.5;  // mean probability of `side` over T
};

/// Side with the larger mean probability; ties go Right.
AttendedPrediction infer_attended(const nd::NdArray& probs);

/// Network inputs with per-frame labels (0 Left, 1 Right).
struct LabeledWindow {
  data::RecognizerInputs inputs;
  std::vector<std::size_t> frame_labels;
  data::Side window_label = data::Side::Right;
};

/// Labels each normalised window with label_attended_hand.
std::vector<LabeledWindow> make_labeled_windows(const std::vector<data::FrameWindow>& windows);

struct RecognizerTrainConfig {
  std::size_t epochs = 60;
  std::size_t batch = 32;
  double lr = 0.005;
  double decay = 0.95;
  double weight_decay = 0.05;
  std::uint64_t seed = 0;  // shuffling and dropout
};

/// AdamW on per-frame cross-entropy, averaged over frames and batch.
/// Throws DataError on an empty training set.
std::vector<EpochLog> train_recognizer(Recognizer& model, const std::vector<LabeledWindow>& samples,
                                       const RecognizerTrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace hoigaze::recognizer
