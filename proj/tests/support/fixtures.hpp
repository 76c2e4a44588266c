#pragma once

#include <random>

#include "hoigaze/data/frame.hpp"

namespace hoigaze::testing {

inline data::Vec3 random_vec(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  return {d(rng), d(rng), d(rng)};
}

inline data::Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  for (;;) {
    data::Vec3 v{d(rng), d(rng), d(rng)};
    const double n = data::norm(v);
    if (n > 1e-6) return (1.0 / n) * v;
  }
}

inline data::Frame random_frame(std::mt19937_64& rng, std::size_t joints, std::size_t objects) {
  data::Frame f;
  f.head_pos = random_vec(rng);
  f.head_dir = random_unit(rng);
  f.eye_pos = f.head_pos + 0.05 * random_vec(rng);
  f.gaze_dir = random_unit(rng);
  f.left_wrist = random_vec(rng);
  f.right_wrist = random_vec(rng);
  for (std::size_t k = 0; k < joints; ++k) {
    f.left_hand.push_back(f.left_wrist + 0.1 * random_vec(rng));
    f.right_hand.push_back(f.right_wrist + 0.1 * random_vec(rng));
  }
  for (std::size_t j = 0; j < objects; ++j) f.objects.push_back(random_vec(rng));
  return f;
}

inline data::FrameWindow random_window(std::mt19937_64& rng, std::size_t steps, std::size_t joints,
                                       std::size_t objects) {
  data::FrameWindow w;
  w.sequence_id = "random";
  for (std::size_t t = 0; t < steps; ++t) w.frames.push_back(random_frame(rng, joints, objects));
  return w;
}

inline data::Sequence random_sequence(std::mt19937_64& rng, std::size_t frames, std::size_t joints,
                                      std::size_t objects) {
  data::Sequence s;
  s.id = "seq";
  s.info.joints = joints;
  s.info.objects = objects;
  for (std::size_t t = 0; t < frames; ++t) s.frames.push_back(random_frame(rng, joints, objects));
  return s;
}

}  // namespace hoigaze::testing
