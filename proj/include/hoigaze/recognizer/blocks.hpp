#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hoigaze/nd/graph.hpp"
#include "hoigaze/nd/ops.hpp"

namespace hoigaze::recognizer {

/// Whether dropout is active, and the stream it draws from.
struct ForwardContext {
  bool training = false;
  nd::Rng* rng = nullptr;

  static ForwardContext eval() { return {}; }
  static ForwardContext train(nd::Rng& rng) { return {true, &rng}; }
};

inline constexpr double kDropoutRate = 0.3;
inline constexpr std::size_t kHeadChannels = 32;
inline constexpr std::size_t kLatentFeatures = 8;

/// Temporal adjacency (T' x T'), spatial adjacency (V x V) and feature
/// map (d_in x d_out) of one spatio-temporal graph convolution.
struct StGcnParams {
  nd::Param* temporal = nullptr;
  nd::Param* spatial = nullptr;
  nd::Param* feature = nullptr;
};

/// Adjacencies start at 1/size plus U(-0.01, 0.01); the feature map is
/// fan-in scaled uniform.
StGcnParams make_stgcn(nd::ParamSet& params, const std::string& prefix, std::size_t steps,
                       std::size_t nodes, std::size_t in_features, std::size_t out_features,
                       nd::Rng& init);

/// X (d_in x V x T') -> temporal multiply -> feature map -> spatial multiply.
nd::Var stgcn_forward(nd::Graph& g, nd::Var x, const StGcnParams& p);

/// Concatenates X with itself along time.
nd::Var temporal_duplicate(nd::Var x);
/// Keeps the first half of an even-length time axis.
nd::Var temporal_halve(nd::Var x);

struct GcnBlockParams {
  StGcnParams gcn;
  nd::Param* norm_gain = nullptr;
  nd::Param* norm_offset = nullptr;
};

/// Input ST-GCN (3 -> 8 over T steps) followed by `blocks` residual GCN
/// blocks that run on the duplicated 2T sequence.
struct GraphBranchParams {
  StGcnParams input;
  std::vector<GcnBlockParams> blocks;
  std::size_t nodes = 0;
  std::size_t steps = 0;
};

GraphBranchParams make_graph_branch(nd::ParamSet& params, const std::string& prefix, std::size_t steps,
                                    std::size_t nodes, std::size_t blocks, nd::Rng& init);

/// 3 x V x T -> 8 x V x T.
nd::Var graph_branch_forward(nd::Graph& g, nd::Var x, const GraphBranchParams& p, double dropout_rate,
                             const ForwardContext& ctx);

struct ConvParams {
  nd::Param* kernel = nullptr;
  nd::Param* bias = nullptr;
};

struct NormParams {
  nd::Param* gain = nullptr;
  nd::Param* offset = nullptr;
};

ConvParams make_conv(nd::ParamSet& params, const std::string& prefix, std::size_t in_channels,
                     std::size_t out_channels, nd::Rng& init);
NormParams make_norm(nd::ParamSet& params, const std::string& prefix, std::size_t channels);

nd::Var conv_forward(nd::Graph& g, nd::Var x, const ConvParams& p);
nd::Var norm_forward(nd::Graph& g, nd::Var x, const NormParams& p);

/// Three kernel-3 convolutions with 32 channels; LN + tanh after the first
/// two, tanh after the third.
struct HeadBranchParams {
  ConvParams conv[3];
  NormParams norm[2];
};

HeadBranchParams make_head_branch(nd::ParamSet& params, const std::string& prefix, nd::Rng& init);

/// 3 x T head directions -> 32 x T.
nd::Var head_branch_forward(nd::Graph& g, nd::Var head, const HeadBranchParams& p);

/// Fan-in scaled uniform initialiser, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
nd::NdArray fan_in_uniform(nd::Shape shape, std::size_t fan_in, nd::Rng& init);

}  // namespace hoigaze::recognizer
