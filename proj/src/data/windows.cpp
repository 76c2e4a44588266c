#include "hoigaze/data/windows.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>

#include "hoigaze/errors.hpp"
#include "hoigaze/log.hpp"

namespace hoigaze::data {

std::vector<FrameWindow> split_windows(const Sequence& sequence, std::size_t length, std::size_t stride) {
  if (length == 0) throw ConfigError("window length must be positive");
  if (stride == 0) throw ConfigError("window stride must be positive");
  std::vector<FrameWindow> out;
  const std::size_t total = sequence.frames.size();
  if (total < length) {
    warn("sequence '" + sequence.id + "' has " + std::to_string(total) + " frames, fewer than the window length " +
         std::to_string(length));
    return out;
  }
  const std::size_t count = (total - length) / stride + 1;
  out.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    FrameWindow win;
    win.sequence_id = sequence.id;
    win.start = w * stride;
    win.frames.assign(sequence.frames.begin() + static_cast<std::ptrdiff_t>(win.start),
                      sequence.frames.begin() + static_cast<std::ptrdiff_t>(win.start + length));
    out.push_back(std::move(win));
  }
  return out;
}

FrameWindow normalize_window(FrameWindow window) {
  if (window.frames.empty()) return window;
  const Vec3 origin = window.frames.front().head_pos;
  for (Frame& f : window.frames) {
    f.head_pos = f.head_pos - origin;
    f.eye_pos = f.eye_pos - origin;
    f.left_wrist = f.left_wrist - origin;
    f.right_wrist = f.right_wrist - origin;
    for (Vec3& p : f.left_hand) p = p - origin;
    for (Vec3& p : f.right_hand) p = p - origin;
    for (Vec3& p : f.objects) p = p - origin;
  }
  return window;
}

Vec3 hand_centre(const Frame& frame, Side side) {
  const auto& joints = frame.hand(side);
  Vec3 c{0.0, 0.0, 0.0};
  for (const Vec3& p : joints) c = c + p;
  return (1.0 / static_cast<double>(joints.size())) * c;
}

double gaze_hand_angle(const Frame& frame, Side side) {
  const Vec3 to_hand = hand_centre(frame, side) - frame.eye_pos;
  if (norm(to_hand) < 1e-9) return std::numbers::pi;
  return angle_between(frame.gaze_dir, to_hand);
}

Side majority_side(const std::vector<Side>& per_frame) {
  const auto left = std::count(per_frame.begin(), per_frame.end(), Side::Left);
  const auto right = static_cast<std::ptrdiff_t>(per_frame.size()) - left;
  return left > right ? Side::Left : Side::Right;
}

AttendedLabel label_attended_hand(const FrameWindow& window) {
  AttendedLabel label;
  label.per_frame.reserve(window.frames.size());
  for (const Frame& f : window.frames) {
    const double left = gaze_hand_angle(f, Side::Left);
    const double right = gaze_hand_angle(f, Side::Right);
    label.per_frame.push_back(right < left ? Side::Right : Side::Left);
  }
  label.window = majority_side(label.per_frame);
  return label;
}

std::vector<std::size_t> nearest_objects(const FrameWindow& window, Side attended, std::size_t count) {
  const std::size_t objects = window.object_count();
  if (count > objects) {
    throw ConfigError("requested " + std::to_string(count) + " nearest objects but the window has " +
                      std::to_string(objects));
  }
  std::vector<double> score(objects, 0.0);
  for (const Frame& f : window.frames) {
    const auto& joints = f.hand(attended);
    for (std::size_t j = 0; j < objects; ++j) {
      for (const Vec3& p : joints) score[j] += distance(p, f.objects[j]);
    }
  }
  const double samples = static_cast<double>(window.length() * window.joints());
  for (double& s : score) s /= samples;
  std::vector<std::size_t> order(objects);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
  order.resize(count);
  return order;
}

namespace {

void put_node(nd::NdArray& dst, std::size_t node, std::size_t t, const Vec3& p) {
  for (std::size_t d = 0; d < 3; ++d) dst.at(d, node, t) = p[d];
}

}  // namespace

RecognizerInputs build_recognizer_inputs(const FrameWindow& window) {
  const std::size_t steps = window.length();
  const std::size_t n = window.joints();
  if (steps == 0) throw DataError("empty window");
  RecognizerInputs in{nd::NdArray({3, steps}), nd::NdArray({3, n + 3, steps}), nd::NdArray({3, n + 3, steps})};
  for (std::size_t t = 0; t < steps; ++t) {
    const Frame& f = window.frames[t];
    for (std::size_t d = 0; d < 3; ++d) in.head.at(d, t) = f.head_dir[d];
    for (nd::NdArray* dst : {&in.left, &in.right}) {
      put_node(*dst, 0, t, f.head_pos);
      put_node(*dst, 1, t, f.left_wrist);
      put_node(*dst, 2, t, f.right_wrist);
    }
    for (std::size_t k = 0; k < n; ++k) {
      put_node(in.left, 3 + k, t, f.left_hand[k]);
      put_node(in.right, 3 + k, t, f.right_hand[k]);
    }
  }
  return in;
}

nd::NdArray build_estimator_input(const FrameWindow& window, Side attended,
                                  const std::vector<std::size_t>& object_indices) {
  const std::size_t steps = window.length();
  const std::size_t n = window.joints();
  if (steps == 0) throw DataError("empty window");
  for (std::size_t j : object_indices) {
    if (j >= window.object_count()) throw ConfigError("object index out of range");
  }
  nd::NdArray out({3, n + 3 + object_indices.size(), steps});
  for (std::size_t t = 0; t < steps; ++t) {
    const Frame& f = window.frames[t];
    put_node(out, 0, t, f.head_pos);
    put_node(out, 1, t, f.left_wrist);
    put_node(out, 2, t, f.right_wrist);
    const auto& joints = f.hand(attended);
    for (std::size_t k = 0; k < n; ++k) put_node(out, 3 + k, t, joints[k]);
    for (std::size_t k = 0; k < object_indices.size(); ++k) {
      put_node(out, 3 + n + k, t, f.objects[object_indices[k]]);
    }
  }
  return out;
}

nd::NdArray head_directions(const FrameWindow& window) {
  nd::NdArray out({3, window.length()});
  for (std::size_t t = 0; t < window.length(); ++t)
    for (std::size_t d = 0; d < 3; ++d) out.at(d, t) = window.frames[t].head_dir[d];
  return out;
}

nd::NdArray gaze_directions(const FrameWindow& window) {
  nd::NdArray out({3, window.length()});
  for (std::size_t t = 0; t < window.length(); ++t)
    for (std::size_t d = 0; d < 3; ++d) out.at(d, t) = window.frames[t].gaze_dir[d];
  return out;
}

}  // namespace hoigaze::data
