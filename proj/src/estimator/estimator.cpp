#include "hoigaze/estimator/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "hoigaze/data/windows.hpp"
#include "hoigaze/errors.hpp"
#include "hoigaze/log.hpp"
#include "hoigaze/nd/checkpoint.hpp"
#include "hoigaze/nd/optim.hpp"

namespace hoigaze::estimator {
namespace {

using recognizer::kHeadChannels;
using recognizer::kLatentFeatures;

constexpr std::size_t kFuseChannels = 64;
constexpr double kMinNorm = 1e-8;

nd::Var attend(nd::Graph& g, nd::Var query, nd::Var source, const AttentionParams& p, nd::Var* weights) {
  const std::size_t dim = p.query->value.dim(0);
  nd::Var q = nd::matmul(query, g.param(*p.query));
  nd::Var k = nd::matmul(source, g.param(*p.key));
  nd::Var v = nd::matmul(source, g.param(*p.value));
  nd::Var scores = nd::scale(nd::matmul(q, nd::transpose(k)), 1.0 / std::sqrt(static_cast<double>(dim)));
  nd::Var a = nd::softmax(scores, 1);
  if (weights != nullptr) *weights = a;
  return nd::add(query, nd::matmul(a, v));
}

void require_shape(const nd::NdArray& a, const nd::Shape& expected, const char* what) {
  if (a.shape() != expected) {
    throw ShapeError(std::string("estimator: ") + what + " has shape " + nd::shape_string(a.shape()) + ", expected " +
                     nd::shape_string(expected));
  }
}

std::size_t parse_count(const nd::Checkpoint& ckpt, const std::string& key) {
  const std::string& text = ckpt.get(key);
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw DataError("checkpoint entry " + key + "=" + text + " is not a non-negative integer");
  }
}

bool parse_flag(const nd::Checkpoint& ckpt, const std::string& key) {
  const std::string& text = ckpt.get(key);
  if (text == "1") return true;
  if (text == "0") return false;
  throw DataError("checkpoint entry " + key + "=" + text + " must be 0 or 1");
}

double parse_real(const nd::Checkpoint& ckpt, const std::string& key) {
  const std::string& text = ckpt.get(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw DataError("checkpoint entry " + key + "=" + text + " is not a number");
  }
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double mean_angle_deg(const nd::NdArray& a, const nd::NdArray& b) {
  const std::size_t steps = a.dim(1);
  double total = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    double c = a.at(0, t) * b.at(0, t) + a.at(1, t) * b.at(1, t) + a.at(2, t) * b.at(2, t);
    total += std::acos(std::clamp(c, -1.0, 1.0));
  }
  return total / static_cast<double>(steps) * 180.0 / std::numbers::pi;
}

}  // namespace

AttentionParams make_attention(nd::ParamSet& params, const std::string& prefix, std::size_t query_dim,
                               std::size_t key_dim, nd::Rng& init) {
  AttentionParams p;
  p.query = &params.add(prefix + ".W_q", recognizer::fan_in_uniform({query_dim, query_dim}, query_dim, init));
  p.key = &params.add(prefix + ".W_k", recognizer::fan_in_uniform({key_dim, query_dim}, key_dim, init));
  p.value = &params.add(prefix + ".W_v", recognizer::fan_in_uniform({key_dim, query_dim}, key_dim, init));
  return p;
}

nd::Var self_attention(nd::Graph& g, nd::Var x, const AttentionParams& p, nd::Var* weights) {
  return attend(g, x, x, p, weights);
}

nd::Var cross_attention(nd::Graph& g, nd::Var query, nd::Var source, const AttentionParams& p, nd::Var* weights) {
  const nd::NdArray& q = query.value();
  const nd::NdArray& s = source.value();
  if (q.rank() != 2 || s.rank() != 2) throw ShapeError("cross_attention: inputs must be T x n");
  if (q.dim(0) != s.dim(0)) {
    throw ShapeError("cross_attention: query has " + std::to_string(q.dim(0)) + " frames, source has " +
                     std::to_string(s.dim(0)));
  }
  return attend(g, query, source, p, weights);
}

std::vector<double> eye_head_weights(const nd::NdArray& gaze, const nd::NdArray& head, const EyeHeadLossConfig& config) {
  if (gaze.rank() != 2 || gaze.dim(0) != 3 || gaze.shape() != head.shape())
    throw ShapeError("eye_head_weights: gaze and head must both be 3 x T");
  std::vector<double> w(gaze.dim(1), 1.0);
  if (config.mse) return w;
  for (std::size_t t = 0; t < w.size(); ++t) {
    const double c = gaze.at(0, t) * head.at(0, t) + gaze.at(1, t) * head.at(1, t) + gaze.at(2, t) * head.at(2, t);
    if (c > config.cos_threshold) w[t] = config.weight;
  }
  return w;
}

nd::Var eye_head_loss(nd::Var pred, const nd::NdArray& gaze, const nd::NdArray& head, const EyeHeadLossConfig& config) {
  return nd::weighted_squared_error(pred, gaze, eye_head_weights(gaze, head, config));
}

Estimator::Estimator(const EstimatorConfig& config) : config_(config) {
  if (config.joints < 1) throw ConfigError("estimator: N must be at least 1");
  if (config.steps < 1) throw ConfigError("estimator: T must be at least 1");
  if (!(config.dropout >= 0.0 && config.dropout < 1.0)) throw ConfigError("estimator: dropout must lie in [0, 1)");
  nd::Rng init(config.seed);
  const std::size_t nodes = config.nodes();
  const std::size_t ho_dim = kLatentFeatures * nodes;
  head_ = recognizer::make_head_branch(params_, "head", init);
  hand_object_ = recognizer::make_graph_branch(params_, "hand_object", config.steps, nodes, config.gcn_blocks, init);
  if (config.use_self_attention) {
    head_self_ = make_attention(params_, "attn.head_self", kHeadChannels, kHeadChannels, init);
    hand_object_self_ = make_attention(params_, "attn.hand_object_self", ho_dim, ho_dim, init);
  }
  if (config.use_cross_attention) {
    head_cross_ = make_attention(params_, "attn.head_cross", kHeadChannels, ho_dim, init);
    hand_object_cross_ = make_attention(params_, "attn.hand_object_cross", ho_dim, kHeadChannels, init);
  }
  fuse_conv_ = recognizer::make_conv(params_, "fuse.conv0", ho_dim + kHeadChannels, kFuseChannels, init);
  fuse_norm_ = recognizer::make_norm(params_, "fuse.ln0", kFuseChannels);
  out_conv_ = recognizer::make_conv(params_, "fuse.conv1", kFuseChannels, 3, init);
}

Estimator::Output Estimator::forward(nd::Graph& g, const nd::NdArray& head, const nd::NdArray& hand_object,
                                     const ForwardContext& ctx) const {
  const std::size_t nodes = config_.nodes(), steps = config_.steps;
  require_shape(head, {3, steps}, "head input");
  require_shape(hand_object, {3, nodes, steps}, "hand-object input");

  Output out;
  out.head_features = recognizer::head_branch_forward(g, g.constant(head), head_);
  nd::Var ho = recognizer::graph_branch_forward(g, g.constant(hand_object), hand_object_, config_.dropout, ctx);
  out.hand_object_features = nd::reshape(ho, {kLatentFeatures * nodes, steps});

  nd::Var he_t = nd::transpose(out.head_features);
  nd::Var ho_t = nd::transpose(out.hand_object_features);
  if (config_.use_self_attention) {
    he_t = self_attention(g, he_t, head_self_);
    ho_t = self_attention(g, ho_t, hand_object_self_);
  }
  if (config_.use_cross_attention) {
    // Both directions read the self-attended features.
    nd::Var he_cross = cross_attention(g, he_t, ho_t, head_cross_);
    nd::Var ho_cross = cross_attention(g, ho_t, he_t, hand_object_cross_);
    he_t = he_cross;
    ho_t = ho_cross;
  }
  out.head_enhanced = he_t;
  out.hand_object_enhanced = ho_t;

  out.features = nd::concat({nd::transpose(he_t), nd::transpose(ho_t)}, 0);
  nd::Var h = nd::tanh(recognizer::norm_forward(g, recognizer::conv_forward(g, out.features, fuse_conv_), fuse_norm_));
  out.raw = nd::tanh(recognizer::conv_forward(g, h, out_conv_));
  out.gaze = nd::unit_columns(out.raw, head, kMinNorm, &out.fallback_frames);
  if (out.fallback_frames > 0)
    warn("estimator: " + std::to_string(out.fallback_frames) + " degenerate frame(s) fell back to head direction");
  return out;
}

nd::NdArray Estimator::predict(const nd::NdArray& head, const nd::NdArray& hand_object) const {
  nd::Graph g;
  return forward(g, head, hand_object, ForwardContext::eval()).gaze.value();
}

nd::NdArray Estimator::predict(const data::FrameWindow& normalized_window, data::Side attended) const {
  const auto objects = data::nearest_objects(normalized_window, attended, config_.objects);
  return predict(data::head_directions(normalized_window),
                 data::build_estimator_input(normalized_window, attended, objects));
}

void Estimator::save(const std::filesystem::path& path) const {
  nd::save_checkpoint(path, "estimator",
                      {{"N", std::to_string(config_.joints)},
                       {"K", std::to_string(config_.objects)},
                       {"T", std::to_string(config_.steps)},
                       {"B_e", std::to_string(config_.gcn_blocks)},
                       {"self_attention", config_.use_self_attention ? "1" : "0"},
                       {"cross_attention", config_.use_cross_attention ? "1" : "0"},
                       {"loss", config_.loss.mse ? "mse" : "eye_head"},
                       {"cos_eh", format_real(config_.loss.cos_threshold)},
                       {"f_eh", format_real(config_.loss.weight)},
                       {"seed", std::to_string(config_.seed)}},
                      params_);
}

Estimator Estimator::load(const std::filesystem::path& path) {
  const nd::Checkpoint ckpt = nd::load_checkpoint(path);
  if (ckpt.kind != "estimator")
    throw DataError(path.string() + ": expected an estimator checkpoint, found kind=" + ckpt.kind);
  EstimatorConfig config;
  config.joints = parse_count(ckpt, "N");
  config.objects = parse_count(ckpt, "K");
  config.steps = parse_count(ckpt, "T");
  config.gcn_blocks = parse_count(ckpt, "B_e");
  config.use_self_attention = parse_flag(ckpt, "self_attention");
  config.use_cross_attention = parse_flag(ckpt, "cross_attention");
  const std::string& loss = ckpt.get("loss");
  if (loss != "mse" && loss != "eye_head") throw DataError("checkpoint entry loss=" + loss + " is unknown");
  config.loss.mse = loss == "mse";
  config.loss.cos_threshold = parse_real(ckpt, "cos_eh");
  config.loss.weight = parse_real(ckpt, "f_eh");
  config.seed = parse_count(ckpt, "seed");
  Estimator model(config);
  nd::restore_params(model.params_, ckpt);
  return model;
}

std::vector<data::Side> attended_sides(const std::vector<data::FrameWindow>& windows,
                                       const recognizer::Recognizer* recognizer) {
  std::vector<data::Side> out;
  out.reserve(windows.size());
  for (const data::FrameWindow& w : windows) {
    if (recognizer != nullptr) {
      out.push_back(recognizer::infer_attended(recognizer->predict(w)).side);
    } else {
      out.push_back(data::label_attended_hand(w).window);
    }
  }
  return out;
}

std::vector<GazeSample> make_gaze_samples(const std::vector<data::FrameWindow>& windows,
                                          const std::vector<data::Side>& sides, std::size_t objects) {
  if (windows.size() != sides.size()) throw UsageError("make_gaze_samples: one attended side per window");
  std::vector<GazeSample> out;
  out.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto chosen = data::nearest_objects(windows[i], sides[i], objects);
    out.push_back({data::head_directions(windows[i]), data::build_estimator_input(windows[i], sides[i], chosen),
                   data::gaze_directions(windows[i])});
  }
  return out;
}

std::vector<EpochLog> train_estimator(Estimator& model, const std::vector<GazeSample>& samples,
                                      const EstimatorTrainConfig& config, const EpochCallback& on_epoch) {
  if (samples.empty()) throw DataError("train_estimator: empty training set");
  if (config.epochs == 0) throw ConfigError("train_estimator: epochs must be positive");
  nd::AdamOptimizer optimizer = nd::make_adam(config.lr, config.decay);
  nd::Rng shuffle_rng(config.seed);
  nd::Rng dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const std::vector<nd::Param*> params = model.params().all();
  const ForwardContext ctx = ForwardContext::train(dropout_rng);

  std::vector<EpochLog> log;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_total = 0.0, error_total = 0.0;
    for (const auto& batch : shuffled_batches(samples.size(), config.batch, shuffle_rng)) {
      model.params().zero_grad();
      for (std::size_t index : batch) {
        const GazeSample& s = samples[index];
        nd::Graph g;
        const Estimator::Output out = model.forward(g, s.head, s.hand_object, ctx);
        nd::Var loss = eye_head_loss(out.gaze, s.gaze, s.head, model.config().loss);
        g.backward(loss, 1.0 / static_cast<double>(batch.size()));
        loss_total += loss.value()[0];
        error_total += mean_angle_deg(out.gaze.value(), s.gaze);
      }
      optimizer.step(params, epoch);
    }
    const double n = static_cast<double>(samples.size());
    EpochLog entry{epoch, loss_total / n, optimizer.learning_rate(epoch), error_total / n};
    log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  return log;
}

}  // namespace hoigaze::estimator
