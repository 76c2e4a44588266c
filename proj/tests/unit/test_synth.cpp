#include <cmath>
#include <fstream>

#include "doctest.h"
#include "hoigaze/data/sequence_io.hpp"
#include "hoigaze/data/windows.hpp"
#include "hoigaze/errors.hpp"
#include "hoigaze/synth/generator.hpp"
#include "support/temp_dir.hpp"

namespace data = hoigaze::data;
namespace synth = hoigaze::synth;
using hoigaze::testing::TempDir;

namespace {

synth::SynthConfig small_config() {
  synth::SynthConfig c;
  c.num_sequences = 3;
  c.frames_per_sequence = 300;
  c.joints = 5;
  c.objects = 3;
  return c;
}

std::vector<double> flatten(const data::Sequence& s) {
  std::vector<double> out;
  auto put = [&](const data::Vec3& v) { out.insert(out.end(), v.begin(), v.end()); };
  for (const auto& f : s.frames) {
    for (const auto* v : {&f.head_pos, &f.head_dir, &f.eye_pos, &f.gaze_dir, &f.left_wrist, &f.right_wrist}) put(*v);
    for (const auto& v : f.left_hand) put(v);
    for (const auto& v : f.right_hand) put(v);
    for (const auto& v : f.objects) put(v);
  }
  return out;
}

// Per-frame labels over a whole sequence, computed frame by frame.
std::vector<data::Side> frame_labels(const data::Sequence& s) {
  data::FrameWindow w;
  w.frames = s.frames;
  return data::label_attended_hand(w).per_frame;
}

double mean_gaze_head_deg(const synth::SynthConfig& c) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < c.num_sequences; ++i) {
    for (const auto& f : synth::generate_sequence(c, i).sequence.frames) {
      total += data::angle_between(f.gaze_dir, f.head_dir);
      ++count;
    }
  }
  return total / static_cast<double>(count) * 180.0 / M_PI;
}

}  // namespace

TEST_CASE("generate_sequence is determined by seed and index") {
  const auto c = small_config();
  const auto a = synth::generate_sequence(c, 1);
  const auto b = synth::generate_sequence(c, 1);
  CHECK(flatten(a.sequence) == flatten(b.sequence));
  CHECK(a.scripted == b.scripted);
  CHECK_FALSE(flatten(a.sequence) == flatten(synth::generate_sequence(c, 2).sequence));
  auto other_seed = c;
  other_seed.seed = 8;
  CHECK_FALSE(flatten(a.sequence) == flatten(synth::generate_sequence(other_seed, 1).sequence));
}

TEST_CASE("generated sequences have the configured sizes and unit directions") {
  const auto c = small_config();
  const auto g = synth::generate_sequence(c, 0);
  REQUIRE(g.sequence.frames.size() == c.frames_per_sequence);
  CHECK(g.scripted.size() == c.frames_per_sequence);
  CHECK(g.crossing.size() == c.frames_per_sequence);
  for (const auto& f : g.sequence.frames) {
    CHECK(f.left_hand.size() == c.joints);
    CHECK(f.right_hand.size() == c.joints);
    CHECK(f.objects.size() == c.objects);
    CHECK(std::abs(data::norm(f.head_dir) - 1.0) < 1e-6);
    CHECK(std::abs(data::norm(f.gaze_dir) - 1.0) < 1e-6);
    CHECK(f.left_wrist[0] <= -0.05 + 1e-12);
    CHECK(f.right_wrist[0] >= 0.05 - 1e-12);
  }
}

TEST_CASE("head displacement per frame is bounded by speed / fps") {
  auto c = small_config();
  for (double speed : {0.1, 0.3, 1.0}) {
    c.head_speed = speed;
    const auto frames = synth::generate_sequence(c, 0).sequence.frames;
    for (std::size_t t = 1; t < frames.size(); ++t)
      CHECK(data::distance(frames[t].head_pos, frames[t - 1].head_pos) <= speed / 30.0 + 1e-12);
  }
}

TEST_CASE("perfect coordination lets labeling recover the scripted hand") {
  auto c = small_config();
  c.coordination = 1.0;
  c.gaze_noise_deg = 0.0;
  std::size_t agree = 0, total = 0;
  for (std::size_t i = 0; i < c.num_sequences; ++i) {
    const auto g = synth::generate_sequence(c, i);
    const auto labels = frame_labels(g.sequence);
    for (std::size_t t = 0; t < labels.size(); ++t) {
      if (g.crossing[t]) continue;
      ++total;
      if (labels[t] == g.scripted[t]) ++agree;
    }
  }
  REQUIRE(total > 0);
  CHECK(static_cast<double>(agree) / static_cast<double>(total) >= 0.99);
}

TEST_CASE("head_follow 1 without noise aligns head with gaze") {
  auto c = small_config();
  c.head_follow = 1.0;
  c.gaze_noise_deg = 0.0;
  const auto frames = synth::generate_sequence(c, 0).sequence.frames;
  double mean_dot = 0.0;
  for (const auto& f : frames) mean_dot += data::dot(f.gaze_dir, f.head_dir);
  CHECK(mean_dot / static_cast<double>(frames.size()) > 0.999);
}

TEST_CASE("mean gaze-head angle falls as head_follow rises") {
  auto c = small_config();
  c.head_follow = 0.02;
  const double slow = mean_gaze_head_deg(c);
  c.head_follow = 0.1;
  const double medium = mean_gaze_head_deg(c);
  c.head_follow = 0.5;
  const double fast = mean_gaze_head_deg(c);
  CHECK(slow > medium);
  CHECK(medium > fast);
}

TEST_CASE("static hand mode keeps finger offsets rigid") {
  auto c = small_config();
  auto joint_distances = [](const data::Frame& f) {
    std::vector<double> d;
    for (const auto& j : f.right_hand) d.push_back(data::distance(j, f.right_wrist));
    for (std::size_t a = 0; a < f.left_hand.size(); ++a)
      for (std::size_t b = a + 1; b < f.left_hand.size(); ++b) d.push_back(data::distance(f.left_hand[a], f.left_hand[b]));
    return d;
  };
  c.hand_mode = data::HandMode::Static;
  const auto rigid = synth::generate_sequence(c, 0).sequence;
  CHECK(rigid.info.hand_mode == data::HandMode::Static);
  const auto ref = joint_distances(rigid.frames.front());
  for (const auto& f : rigid.frames) {
    const auto d = joint_distances(f);
    for (std::size_t k = 0; k < d.size(); ++k) CHECK(d[k] == doctest::Approx(ref[k]).epsilon(1e-9));
  }

  c.hand_mode = data::HandMode::Dynamic;
  const auto moving = synth::generate_sequence(c, 0).sequence;
  double max_change = 0.0;
  const auto first = joint_distances(moving.frames.front());
  for (const auto& f : moving.frames) {
    const auto d = joint_distances(f);
    for (std::size_t k = 0; k < d.size(); ++k) max_change = std::max(max_change, std::abs(d[k] - first[k]));
  }
  CHECK(max_change > 1e-3);
}

TEST_CASE("invalid configs are rejected") {
  auto c = small_config();
  c.coordination = 1.5;
  CHECK_THROWS_AS(synth::validate(c), hoigaze::ConfigError);
  c = small_config();
  c.gaze_noise_deg = -1.0;
  CHECK_THROWS_AS(synth::validate(c), hoigaze::ConfigError);
  c = small_config();
  c.head_follow = -0.1;
  CHECK_THROWS_AS(synth::generate_sequence(c, 0), hoigaze::ConfigError);
  c = small_config();
  c.holdout = 4;
  CHECK_THROWS_AS(synth::validate(c), hoigaze::ConfigError);
}

TEST_CASE("generate_dataset writes reloadable files and sidecars") {
  TempDir dir("synth");
  auto c = small_config();
  c.coordination = 0.9;
  c.holdout = 1;
  const auto manifest = synth::generate_dataset(c, dir.path());
  REQUIRE(manifest.sequences.size() == 3);

  const auto loaded = data::load_manifest(dir / "manifest.txt");
  CHECK(loaded.sequences.size() == 3);
  CHECK(loaded.info.joints == c.joints);
  CHECK(data::load_manifest(dir / "train.txt").sequences.size() == 2);
  CHECK(data::load_manifest(dir / "test.txt").sequences.size() == 1);

  std::size_t agree = 0, total = 0;
  for (std::size_t i = 0; i < loaded.sequences.size(); ++i) {
    const auto& path = loaded.sequences[i];
    const auto seq = data::load_sequence(path, loaded.info);
    const auto scripted = synth::load_labels(std::filesystem::path(path).replace_extension(".labels"));
    const auto crossing = synth::load_crossing(std::filesystem::path(path).replace_extension(".crossing"));
    REQUIRE(scripted.size() == seq.frames.size());
    REQUIRE(crossing.size() == seq.frames.size());
    const auto labels = frame_labels(seq);
    for (std::size_t t = 0; t < labels.size(); ++t, ++total)
      if (labels[t] == scripted[t]) ++agree;
  }
  CHECK(static_cast<double>(agree) / static_cast<double>(total) >= 0.95);
}

TEST_CASE("generate_dataset edge cases") {
  TempDir dir("synth_edge");
  auto c = small_config();
  c.num_sequences = 0;
  const auto manifest = synth::generate_dataset(c, dir / "empty");
  CHECK(manifest.sequences.empty());
  CHECK(std::filesystem::exists(dir / "empty" / "manifest.txt"));

  std::ofstream(dir / "blocker") << "x";
  c.num_sequences = 1;
  CHECK_THROWS_AS(synth::generate_dataset(c, dir / "blocker" / "sub"), hoigaze::IoError);
}

TEST_CASE("sidecar readers reject malformed lines") {
  TempDir dir("sidecar");
  std::ofstream(dir / "bad.labels") << "L\nX\n";
  CHECK_THROWS_AS(synth::load_labels(dir / "bad.labels"), hoigaze::ParseError);
  std::ofstream(dir / "bad.crossing") << "0\n2\n";
  CHECK_THROWS_AS(synth::load_crossing(dir / "bad.crossing"), hoigaze::ParseError);
}
