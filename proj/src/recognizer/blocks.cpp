#include "hoigaze/recognizer/blocks.hpp"

#include <cmath>

#include "hoigaze/errors.hpp"

namespace hoigaze::recognizer {
namespace {

nd::NdArray adjacency_init(std::size_t size, nd::Rng& init) {
  nd::NdArray a({size, size});
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  const double base = 1.0 / static_cast<double>(size);
  for (double& v : a.data()) v = base + noise(init);
  return a;
}

void require_axis(const nd::NdArray& x, std::size_t axis, std::size_t expected, const char* name) {
  if (x.dim(axis) != expected) {
    throw ShapeError("stgcn: " + std::string(name) + " axis has length " + std::to_string(x.dim(axis)) +
                     ", parameters expect " + std::to_string(expected));
  }
}

}  // namespace

nd::NdArray fan_in_uniform(nd::Shape shape, std::size_t fan_in, nd::Rng& init) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  nd::NdArray out(std::move(shape));
  for (double& v : out.data()) v = dist(init);
  return out;
}

StGcnParams make_stgcn(nd::ParamSet& params, const std::string& prefix, std::size_t steps,
                       std::size_t nodes, std::size_t in_features, std::size_t out_features,
                       nd::Rng& init) {
  StGcnParams p;
  p.temporal = &params.add(prefix + ".A_T", adjacency_init(steps, init));
  p.spatial = &params.add(prefix + ".A_S", adjacency_init(nodes, init));
  p.feature = &params.add(prefix + ".W", fan_in_uniform({in_features, out_features}, in_features, init));
  return p;
}

nd::Var stgcn_forward(nd::Graph& g, nd::Var x, const StGcnParams& p) {
  const nd::NdArray& xv = x.value();
  if (xv.rank() != 3) throw ShapeError("stgcn: input must be features x nodes x time, got " + nd::shape_string(xv.shape()));
  require_axis(xv, 0, p.feature->value.dim(0), "feature");
  require_axis(xv, 1, p.spatial->value.dim(0), "spatial (node)");
  require_axis(xv, 2, p.temporal->value.dim(0), "temporal");
  nd::Var y = nd::axis_product(x, g.param(*p.temporal), 2, false);
  y = nd::axis_product(y, g.param(*p.feature), 0, false);
  return nd::axis_product(y, g.param(*p.spatial), 1, true);
}

nd::Var temporal_duplicate(nd::Var x) { return nd::concat({x, x}, x.value().rank() - 1); }

nd::Var temporal_halve(nd::Var x) {
  const std::size_t axis = x.value().rank() - 1;
  const std::size_t length = x.value().dim(axis);
  if (length % 2 != 0) throw ShapeError("temporal_halve: odd time length " + std::to_string(length));
  return nd::slice(x, axis, 0, length / 2);
}

GraphBranchParams make_graph_branch(nd::ParamSet& params, const std::string& prefix, std::size_t steps,
                                    std::size_t nodes, std::size_t blocks, nd::Rng& init) {
  GraphBranchParams p;
  p.nodes = nodes;
  p.steps = steps;
  p.input = make_stgcn(params, prefix + ".input", steps, nodes, 3, kLatentFeatures, init);
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::string name = prefix + ".block" + std::to_string(b);
    GcnBlockParams block;
    block.gcn = make_stgcn(params, name, 2 * steps, nodes, kLatentFeatures, kLatentFeatures, init);
    const std::size_t channels = kLatentFeatures * nodes;
    block.norm_gain = &params.add(name + ".ln.gain", nd::NdArray::filled({channels}, 1.0));
    block.norm_offset = &params.add(name + ".ln.offset", nd::NdArray({channels}));
    p.blocks.push_back(block);
  }
  return p;
}

nd::Var graph_branch_forward(nd::Graph& g, nd::Var x, const GraphBranchParams& p, double dropout_rate,
                             const ForwardContext& ctx) {
  nd::Var h = temporal_duplicate(stgcn_forward(g, x, p.input));
  const std::size_t channels = kLatentFeatures * p.nodes;
  const std::size_t doubled = 2 * p.steps;
  for (const GcnBlockParams& block : p.blocks) {
    nd::Var y = stgcn_forward(g, h, block.gcn);
    // Layer norm runs over the flattened feature x node channels of each step.
    y = nd::reshape(y, {channels, doubled});
    y = nd::layer_norm(y, g.param(*block.norm_gain), g.param(*block.norm_offset));
    y = nd::tanh(y);
    if (ctx.training) {
      if (ctx.rng == nullptr) throw UsageError("training forward pass needs an RNG");
      y = nd::dropout(y, dropout_rate, true, *ctx.rng);
    }
    h = nd::add(h, nd::reshape(y, {kLatentFeatures, p.nodes, doubled}));
  }
  return temporal_halve(h);
}

ConvParams make_conv(nd::ParamSet& params, const std::string& prefix, std::size_t in_channels,
                     std::size_t out_channels, nd::Rng& init) {
  ConvParams p;
  p.kernel = &params.add(prefix + ".kernel",
                         fan_in_uniform({out_channels, in_channels, 3}, 3 * in_channels, init));
  p.bias = &params.add(prefix + ".bias", nd::NdArray({out_channels}));
  return p;
}

NormParams make_norm(nd::ParamSet& params, const std::string& prefix, std::size_t channels) {
  NormParams p;
  p.gain = &params.add(prefix + ".gain", nd::NdArray::filled({channels}, 1.0));
  p.offset = &params.add(prefix + ".offset", nd::NdArray({channels}));
  return p;
}

nd::Var conv_forward(nd::Graph& g, nd::Var x, const ConvParams& p) {
  return nd::conv1d(x, g.param(*p.kernel), g.param(*p.bias));
}

nd::Var norm_forward(nd::Graph& g, nd::Var x, const NormParams& p) {
  return nd::layer_norm(x, g.param(*p.gain), g.param(*p.offset));
}

HeadBranchParams make_head_branch(nd::ParamSet& params, const std::string& prefix, nd::Rng& init) {
  HeadBranchParams p;
  p.conv[0] = make_conv(params, prefix + ".conv0", 3, kHeadChannels, init);
  p.norm[0] = make_norm(params, prefix + ".ln0", kHeadChannels);
  p.conv[1] = make_conv(params, prefix + ".conv1", kHeadChannels, kHeadChannels, init);
  p.norm[1] = make_norm(params, prefix + ".ln1", kHeadChannels);
  p.conv[2] = make_conv(params, prefix + ".conv2", kHeadChannels, kHeadChannels, init);
  return p;
}

nd::Var head_branch_forward(nd::Graph& g, nd::Var head, const HeadBranchParams& p) {
  nd::Var h = nd::tanh(norm_forward(g, conv_forward(g, head, p.conv[0]), p.norm[0]));
  h = nd::tanh(norm_forward(g, conv_forward(g, h, p.conv[1]), p.norm[1]));
  return nd::tanh(conv_forward(g, h, p.conv[2]));
}

}  // namespace hoigaze::recognizer
