#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "hoigaze/data/frame.hpp"
#include "hoigaze/nd/graph.hpp"
#include "hoigaze/recognizer/blocks.hpp"
#include "hoigaze/recognizer/recognizer.hpp"
#include "hoigaze/training.hpp"

namespace hoigaze::estimator {

using recognizer::ForwardContext;

/// W_q: n_q x n_q; W_k, W_v: n_kv x n_q.
struct AttentionParams {
  nd::Param* query = nullptr;
  nd::Param* key = nullptr;
  nd::Param* value = nullptr;
};

AttentionParams make_attention(nd::ParamSet& params, const std::string& prefix, std::size_t query_dim,
                               std::size_t key_dim, nd::Rng& init);

/// Y = X + softmax(Q K^T / sqrt(n)) V with Q, K, V projected from X (T x n).
/// When `weights` is given it receives the T x T attention matrix.
nd::Var self_attention(nd::Graph& g, nd::Var x, const AttentionParams& p, nd::Var* weights = nullptr);

/// Queries from `query` (T x n_q), keys and values from `source` (T x n_kv)
/// mapped into n_q dimensions; the residual goes to the query side.
nd::Var cross_attention(nd::Graph& g, nd::Var query, nd::Var source, const AttentionParams& p,
                        nd::Var* weights = nullptr);

/// Eye-head coordination loss settings. `mse` sets every weight to 1.
struct EyeHeadLossConfig {
  double cos_threshold = 0.8;
  double weight = 4.0;
  bool mse = false;
};

/// Per-frame weights: `weight` where g . h > cos_threshold (strictly), else 1.
std::vector<double> eye_head_weights(const nd::NdArray& gaze, const nd::NdArray& head, const EyeHeadLossConfig& config);

/// Mean over frames of w_i * |g_i - pred_i|^2.
nd::Var eye_head_loss(nd::Var pred, const nd::NdArray& gaze, const nd::NdArray& head, const EyeHeadLossConfig& config);

struct EstimatorConfig {
  std::size_t joints = 20;     // N
  std::size_t objects = 1;     // K nearest scene objects
  std::size_t steps = 15;      // T
  std::size_t gcn_blocks = 4;  // B_e
  bool use_self_attention = true;
  bool use_cross_attention = true;
  double dropout = recognizer::kDropoutRate;
  EyeHeadLossConfig loss;
  std::uint64_t seed = 0;  // initialisation seed

  std::size_t nodes() const { return joints + 3 + objects; }
};

/// Gaze estimator: head CNN, hand-object ST-GCN, self- and cross-attention
/// and a convolutional gaze head with unit-normalised output.
class Estimator {
 public:
  explicit Estimator(const EstimatorConfig& config);

  struct Output {
    nd::Var head_features;          // 32 x T
    nd::Var hand_object_features;   // 8V x T
    nd::Var head_enhanced;          // T x 32 after attention
    nd::Var hand_object_enhanced;   // T x 8V after attention
    nd::Var features;               // (8V + 32) x T
    nd::Var raw;                    // 3 x T before normalisation
    nd::Var gaze;                   // 3 x T unit columns
    std::size_t fallback_frames = 0;
  };

  /// `head` is 3 x T head directions, `hand_object` 3 x V x T.
  Output forward(nd::Graph& g, const nd::NdArray& head, const nd::NdArray& hand_object,
                 const ForwardContext& ctx) const;

  nd::NdArray predict(const nd::NdArray& head, const nd::NdArray& hand_object) const;
  /// Picks the K nearest objects to the attended hand and predicts 3 x T gaze.
  nd::NdArray predict(const data::FrameWindow& normalized_window, data::Side attended) const;

  const EstimatorConfig& config() const noexcept { return config_; }
  nd::ParamSet& params() noexcept { return params_; }
  const nd::ParamSet& params() const noexcept { return params_; }

  void save(const std::filesystem::path& path) const;
  static Estimator load(const std::filesystem::path& path);

 private:
  EstimatorConfig config_;
  nd::ParamSet params_;
  recognizer::HeadBranchParams head_;
  recognizer::GraphBranchParams hand_object_;
  AttentionParams head_self_;
  AttentionParams hand_object_self_;
  AttentionParams head_cross_;
  AttentionParams hand_object_cross_;
  recognizer::ConvParams fuse_conv_;
  recognizer::NormParams fuse_norm_;
  recognizer::ConvParams out_conv_;
};

/// One training or evaluation example.
struct GazeSample {
  nd::NdArray head;         // 3 x T
  nd::NdArray hand_object;  // 3 x V x T
  nd::NdArray gaze;         // 3 x T ground truth
};

/// Attended side per window: the recogniser's decision when one is given,
/// otherwise the ground-truth window label.
std::vector<data::Side> attended_sides(const std::vector<data::FrameWindow>& windows,
                                       const recognizer::Recognizer* recognizer);

std::vector<GazeSample> make_gaze_samples(const std::vector<data::FrameWindow>& windows,
                                          const std::vector<data::Side>& sides, std::size_t objects);

struct EstimatorTrainConfig {
  std::size_t epochs = 80;
  std::size_t batch = 32;
  double lr = 0.005;
  double decay = 0.95;
  std::uint64_t seed = 0;  // shuffling and dropout
};

/// Adam on the eye-head coordination loss of the model's config. The log
/// metric is the mean training angular error in degrees.
std::vector<EpochLog> train_estimator(Estimator& model, const std::vector<GazeSample>& samples,
                                      const EstimatorTrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace hoigaze::estimator
