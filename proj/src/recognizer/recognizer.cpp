#include "hoigaze/recognizer/recognizer.hpp"

#include <string>

#include "hoigaze/errors.hpp"
#include "hoigaze/nd/checkpoint.hpp"
#include "hoigaze/nd/optim.hpp"

namespace hoigaze::recognizer {
namespace {

constexpr std::size_t kFuseChannels = 64;

void require_shape(const nd::NdArray& a, const nd::Shape& expected, const char* what) {
  if (a.shape() != expected) {
    throw ShapeError(std::string("recognizer: ") + what + " has shape " + nd::shape_string(a.shape()) + ", expected " +
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

}  // namespace

Recognizer::Recognizer(const RecognizerConfig& config) : config_(config) {
  if (config.joints < 1) throw ConfigError("recognizer: N must be at least 1");
  if (config.steps < 1) throw ConfigError("recognizer: T must be at least 1");
  if (!(config.dropout >= 0.0 && config.dropout < 1.0)) throw ConfigError("recognizer: dropout must lie in [0, 1)");
  nd::Rng init(config.seed);
  const std::size_t nodes = config.joints + 3;
  head_ = make_head_branch(params_, "head", init);
  left_ = make_graph_branch(params_, "left", config.steps, nodes, config.gcn_blocks, init);
  right_ = make_graph_branch(params_, "right", config.steps, nodes, config.gcn_blocks, init);
  const std::size_t height = 2 * kLatentFeatures * nodes + kHeadChannels;
  fuse_conv_ = make_conv(params_, "fuse.conv0", height, kFuseChannels, init);
  fuse_norm_ = make_norm(params_, "fuse.ln0", kFuseChannels);
  out_conv_ = make_conv(params_, "fuse.conv1", kFuseChannels, 2, init);
}

Recognizer::Output Recognizer::forward(nd::Graph& g, const data::RecognizerInputs& inputs,
                                       const ForwardContext& ctx) const {
  const std::size_t nodes = config_.joints + 3, steps = config_.steps;
  require_shape(inputs.head, {3, steps}, "head input");
  require_shape(inputs.left, {3, nodes, steps}, "left-hand input");
  require_shape(inputs.right, {3, nodes, steps}, "right-hand input");

  Output out;
  out.head_features = head_branch_forward(g, g.constant(inputs.head), head_);
  out.left_features = graph_branch_forward(g, g.constant(inputs.left), left_, config_.dropout, ctx);
  out.right_features = graph_branch_forward(g, g.constant(inputs.right), right_, config_.dropout, ctx);
  const std::size_t flat = kLatentFeatures * nodes;
  out.features = nd::concat({out.head_features, nd::reshape(out.left_features, {flat, steps}),
                             nd::reshape(out.right_features, {flat, steps})},
                            0);
  nd::Var h = nd::tanh(norm_forward(g, conv_forward(g, out.features, fuse_conv_), fuse_norm_));
  out.logits = conv_forward(g, h, out_conv_);
  out.probs = nd::softmax(out.logits, 0);
  return out;
}

nd::NdArray Recognizer::predict(const data::RecognizerInputs& inputs) const {
  nd::Graph g;
  return forward(g, inputs, ForwardContext::eval()).probs.value();
}

nd::NdArray Recognizer::predict(const data::FrameWindow& normalized_window) const {
  return predict(data::build_recognizer_inputs(normalized_window));
}

void Recognizer::save(const std::filesystem::path& path) const {
  nd::save_checkpoint(path, "recognizer",
                      {{"N", std::to_string(config_.joints)},
                       {"T", std::to_string(config_.steps)},
                       {"B_r", std::to_string(config_.gcn_blocks)},
                       {"seed", std::to_string(config_.seed)}},
                      params_);
}

Recognizer Recognizer::load(const std::filesystem::path& path) {
  const nd::Checkpoint ckpt = nd::load_checkpoint(path);
  if (ckpt.kind != "recognizer")
    throw DataError(path.string() + ": expected a recognizer checkpoint, found kind=" + ckpt.kind);
  RecognizerConfig config;
  config.joints = parse_count(ckpt, "N");
  config.steps = parse_count(ckpt, "T");
  config.gcn_blocks = parse_count(ckpt, "B_r");
  config.seed = parse_count(ckpt, "seed");
  Recognizer model(config);
  nd::restore_params(model.params_, ckpt);
  return model;
}

AttendedPrediction infer_attended(const nd::NdArray& probs) {
  if (probs.rank() != 2 || probs.dim(0) != 2) throw ShapeError("infer_attended: expected 2 x T probabilities");
  const std::size_t steps = probs.dim(1);
  double left = 0.0, right = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    left += probs.at(0, t);
    right += probs.at(1, t);
  }
  left /= static_cast<double>(steps);
  right /= static_cast<double>(steps);
  if (left > right) return {data::Side::Left, left};
  return {data::Side::Right, right};
}

std::vector<LabeledWindow> make_labeled_windows(const std::vector<data::FrameWindow>& windows) {
  std::vector<LabeledWindow> out;
  out.reserve(windows.size());
  for (const data::FrameWindow& w : windows) {
    const data::AttendedLabel label = data::label_attended_hand(w);
    LabeledWindow s;
    s.inputs = data::build_recognizer_inputs(w);
    for (data::Side side : label.per_frame) s.frame_labels.push_back(static_cast<std::size_t>(side));
    s.window_label = label.window;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<EpochLog> train_recognizer(Recognizer& model, const std::vector<LabeledWindow>& samples,
                                       const RecognizerTrainConfig& config, const EpochCallback& on_epoch) {
  if (samples.empty()) throw DataError("train_recognizer: empty training set");
  if (config.epochs == 0) throw ConfigError("train_recognizer: epochs must be positive");
  nd::AdamOptimizer optimizer = nd::make_adamw(config.lr, config.decay, config.weight_decay);
  nd::Rng shuffle_rng(config.seed);
  nd::Rng dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const std::vector<nd::Param*> params = model.params().all();
  const ForwardContext ctx = ForwardContext::train(dropout_rng);

  std::vector<EpochLog> log;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_total = 0.0;
    std::size_t correct = 0, frames = 0;
    for (const auto& batch : shuffled_batches(samples.size(), config.batch, shuffle_rng)) {
      model.params().zero_grad();
      for (std::size_t index : batch) {
        const LabeledWindow& s = samples[index];
        nd::Graph g;
        const Recognizer::Output out = model.forward(g, s.inputs, ctx);
        nd::Var loss = nd::softmax_cross_entropy(out.logits, s.frame_labels);
        g.backward(loss, 1.0 / static_cast<double>(batch.size()));
        loss_total += loss.value()[0];
        const nd::NdArray& p = out.probs.value();
        for (std::size_t t = 0; t < s.frame_labels.size(); ++t, ++frames) {
          const std::size_t predicted = p.at(0, t) > p.at(1, t) ? 0 : 1;
          if (predicted == s.frame_labels[t]) ++correct;
        }
      }
      optimizer.step(params, epoch);
    }
    EpochLog entry{epoch, loss_total / static_cast<double>(samples.size()), optimizer.learning_rate(epoch),
                   static_cast<double>(correct) / static_cast<double>(frames)};
    log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  return log;
}

}  // namespace hoigaze::recognizer
