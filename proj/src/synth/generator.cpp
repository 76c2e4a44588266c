#include "hoigaze/synth/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "hoigaze/data/sequence_io.hpp"
#include "hoigaze/data/windows.hpp"
#include "hoigaze/errors.hpp"

namespace hoigaze::synth {
namespace {

using data::Side;
using data::Vec3;
using Rng = std::mt19937_64;

constexpr double kDt = 1.0 / 30.0;
constexpr double kSideMargin = 0.05;
const Vec3 kUp{0.0, 1.0, 0.0};
const Vec3 kHeadHome{0.0, 1.6, 0.0};

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

Vec3 from_angles(double yaw, double pitch) {
  return {std::sin(yaw) * std::cos(pitch), std::sin(pitch), std::cos(yaw) * std::cos(pitch)};
}

// Any unit vector orthogonal to a unit `v`.
Vec3 perpendicular(const Vec3& v) {
  Vec3 p = data::cross(v, kUp);
  if (data::norm(p) < 1e-6) p = data::cross(v, Vec3{1.0, 0.0, 0.0});
  return data::normalized(p);
}

// Right-hand finger layout in the wrist frame: five rays, knuckles spaced
// 3 cm apart. The left hand mirrors x.
Vec3 finger_offset(std::size_t joint, double curl) {
  const double finger = static_cast<double>(joint % 5);
  const double knuckle = static_cast<double>(joint / 5 + 1);
  const double spread = (finger - 2.0) * 0.02;
  return {spread, -0.01 * knuckle * (1.0 + curl), 0.03 * knuckle * (1.0 - 0.25 * curl)};
}

struct HandState {
  Vec3 wrist{};
  Vec3 target{};
  int dwell = 0;
  double yaw = 0.0;
  double yaw_rate = 0.0;
  double curl_phase = 0.0;
};

class SequenceBuilder {
 public:
  SequenceBuilder(const SynthConfig& config, std::size_t index)
      : config_(config), rng_(make_rng(config.seed, index)) {}

  GeneratedSequence build(std::size_t index) {
    GeneratedSequence out;
    char id[32];
    std::snprintf(id, sizeof id, "seq_%03zu", index);
    out.sequence.id = id;
    out.sequence.info = {config_.joints, config_.objects, 30, config_.hand_mode};

    place_objects();
    init_hands();
    const std::vector<Side> schedule = attended_schedule();

    Vec3 head_pos = kHeadHome;
    Vec3 head_vel{};
    Vec3 head_dir = data::normalized(Vec3{0.0, -0.4, 1.0});
    double yaw = 0.0, pitch = radians(-30.0), yaw_vel = 0.0, pitch_vel = 0.0;
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    const double s = config_.smoothing;

    for (std::size_t t = 0; t < config_.frames_per_sequence; ++t) {
      // Head translation: EMA random walk pulled toward home, speed-capped.
      Vec3 kick{unit_normal(rng_), unit_normal(rng_), unit_normal(rng_)};
      head_vel = s * head_vel + (1.0 - s) * (config_.head_speed * kick - 2.0 * (head_pos - kHeadHome));
      const double speed = data::norm(head_vel);
      if (speed > config_.head_speed) head_vel = (config_.head_speed / speed) * head_vel;
      if (t > 0) head_pos = head_pos + kDt * head_vel;

      // Free gaze drift in yaw/pitch.
      yaw_vel = s * yaw_vel + (1.0 - s) * (radians(400.0) * unit_normal(rng_) - 4.0 * yaw);
      pitch_vel = s * pitch_vel + (1.0 - s) * (radians(300.0) * unit_normal(rng_) - 4.0 * (pitch + radians(30.0)));
      yaw = std::clamp(yaw + kDt * yaw_vel, radians(-60.0), radians(60.0));
      pitch = std::clamp(pitch + kDt * pitch_vel, radians(-75.0), radians(15.0));
      const Vec3 drift = from_angles(yaw, pitch);

      for (auto side : {Side::Left, Side::Right}) step_hand(side);

      data::Frame frame;
      frame.head_pos = head_pos;
      frame.left_wrist = hands_[0].wrist;
      frame.right_wrist = hands_[1].wrist;
      frame.left_hand = joints(Side::Left, t);
      frame.right_hand = joints(Side::Right, t);
      frame.objects = objects_;

      const Side attended = schedule[t];
      const double noise_a = radians(config_.gaze_noise_deg) * unit_normal(rng_);
      const double noise_b = radians(config_.gaze_noise_deg) * unit_normal(rng_);
      auto gaze_from = [&](const Vec3& eye) {
        const Vec3 target = data::normalized(data::hand_centre(frame, attended) - eye);
        Vec3 g = data::slerp(drift, target, config_.coordination);
        const Vec3 u = perpendicular(g);
        const Vec3 v = data::cross(g, u);
        g = data::rotate(g, u, noise_a);
        g = data::rotate(g, v, noise_b);
        return data::normalized(g);
      };
      // The eye sits ahead of the head centre, so gaze and head direction
      // are resolved in two passes.
      const Vec3 first = gaze_from(head_pos + kEyeOffset * head_dir);
      head_dir = data::normalized(data::slerp(head_dir, first, config_.head_follow));
      frame.head_dir = head_dir;
      frame.eye_pos = head_pos + kEyeOffset * head_dir;
      frame.gaze_dir = gaze_from(frame.eye_pos);

      const double limit = radians(kCrossingDeg);
      out.crossing.push_back(data::gaze_hand_angle(frame, Side::Left) < limit &&
                             data::gaze_hand_angle(frame, Side::Right) < limit);
      out.scripted.push_back(attended);
      out.sequence.frames.push_back(std::move(frame));
    }
    return out;
  }

 private:
  static Rng make_rng(std::uint64_t seed, std::size_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  void place_objects() {
    objects_.clear();
    for (std::size_t j = 0; j < config_.objects; ++j)
      objects_.push_back({uniform(-0.6, 0.6), uniform(0.8, 1.05), uniform(0.25, 0.6)});
  }

  Vec3 pick_target(Side side) {
    const auto j = std::uniform_int_distribution<std::size_t>(0, objects_.size() - 1)(rng_);
    Vec3 p = objects_[j] + Vec3{uniform(-0.03, 0.03), 0.06, uniform(-0.03, 0.03)};
    p[0] = side == Side::Left ? std::min(p[0], -kSideMargin) : std::max(p[0], kSideMargin);
    return p;
  }

  void init_hands() {
    for (auto side : {Side::Left, Side::Right}) {
      HandState& h = hands_[static_cast<int>(side)];
      const double sign = side == Side::Left ? -1.0 : 1.0;
      h.wrist = {sign * 0.2, 1.0, 0.35};
      h.target = pick_target(side);
      h.yaw = -sign * uniform(0.0, 0.4);
      h.curl_phase = uniform(0.0, 2.0 * std::numbers::pi);
    }
  }

  void step_hand(Side side) {
    HandState& h = hands_[static_cast<int>(side)];
    if (data::distance(h.wrist, h.target) < 0.01) {
      if (h.dwell <= 0) {
        h.dwell = std::uniform_int_distribution<int>(10, 40)(rng_);
      } else if (--h.dwell == 0) {
        h.target = pick_target(side);
      }
    }
    h.wrist = h.wrist + 0.08 * (h.target - h.wrist);
    const double s = config_.smoothing;
    h.yaw_rate = s * h.yaw_rate + (1.0 - s) * uniform(-1.0, 1.0);
    h.yaw += kDt * h.yaw_rate;
  }

  std::vector<Vec3> joints(Side side, std::size_t t) {
    const HandState& h = hands_[static_cast<int>(side)];
    const double mirror = side == Side::Left ? -1.0 : 1.0;
    double curl = 0.0;
    if (config_.hand_mode == data::HandMode::Dynamic)
      curl = 0.5 + 0.5 * std::sin(h.curl_phase + 2.0 * std::numbers::pi * 0.5 * kDt * static_cast<double>(t));
    std::vector<Vec3> out;
    out.reserve(config_.joints);
    for (std::size_t k = 0; k < config_.joints; ++k) {
      Vec3 o = finger_offset(k, curl);
      o[0] *= mirror;
      out.push_back(h.wrist + data::rotate(o, kUp, h.yaw));
    }
    return out;
  }

  std::vector<Side> attended_schedule() {
    std::vector<Side> out(config_.frames_per_sequence);
    Side side = uniform(0.0, 1.0) < 0.5 ? Side::Left : Side::Right;
    std::size_t t = 0;
    while (t < out.size()) {
      const auto span = static_cast<std::size_t>(
          std::max(1.0, std::round(config_.switch_period_frames * uniform(0.5, 1.5))));
      for (std::size_t k = 0; k < span && t < out.size(); ++k) out[t++] = side;
      side = data::other(side);
    }
    return out;
  }

  const SynthConfig& config_;
  Rng rng_;
  std::vector<Vec3> objects_;
  HandState hands_[2];
};

void write_lines(const std::filesystem::path& path, const std::vector<char>& symbols) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (char c : symbols) out << c << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<char> read_symbols(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.size() != 1) throw ParseError(path.string(), number, "expected a single symbol");
    out.push_back(line[0]);
  }
  return out;
}

}  // namespace

void validate(const SynthConfig& c) {
  auto unit_interval = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (c.joints < 1) throw ConfigError("synth: N must be at least 1");
  if (c.objects < 1) throw ConfigError("synth: J must be at least 1");
  if (!unit_interval(c.coordination)) throw ConfigError("synth: coordination must lie in [0, 1]");
  if (!unit_interval(c.head_follow)) throw ConfigError("synth: head_follow must lie in [0, 1]");
  if (!(c.gaze_noise_deg >= 0.0)) throw ConfigError("synth: gaze_noise_deg must be non-negative");
  if (!(c.switch_period_frames > 0.0)) throw ConfigError("synth: switch_period_frames must be positive");
  if (!(c.head_speed > 0.0)) throw ConfigError("synth: head_speed must be positive");
  if (!(c.smoothing >= 0.0 && c.smoothing < 1.0)) throw ConfigError("synth: smoothing must lie in [0, 1)");
  if (c.holdout > c.num_sequences) throw ConfigError("synth: holdout exceeds the number of sequences");
}

GeneratedSequence generate_sequence(const SynthConfig& config, std::size_t index) {
  validate(config);
  return SequenceBuilder(config, index).build(index);
}

data::DatasetManifest generate_dataset(const SynthConfig& config, const std::filesystem::path& out_dir) {
  validate(config);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory " + out_dir.string() + ": " + ec.message());

  data::DatasetManifest manifest;
  manifest.info = {config.joints, config.objects, 30, config.hand_mode};
  for (std::size_t i = 0; i < config.num_sequences; ++i) {
    const GeneratedSequence g = generate_sequence(config, i);
    const auto path = out_dir / (g.sequence.id + ".seq");
    data::save_sequence(path, g.sequence);
    std::vector<char> labels, crossing;
    for (Side s : g.scripted) labels.push_back(data::side_letter(s));
    for (bool c : g.crossing) crossing.push_back(c ? '1' : '0');
    write_lines(out_dir / (g.sequence.id + ".labels"), labels);
    write_lines(out_dir / (g.sequence.id + ".crossing"), crossing);
    manifest.sequences.push_back(path);
  }
  data::save_manifest(out_dir / "manifest.txt", manifest);
  if (config.holdout > 0) {
    const auto split = manifest.sequences.begin() + static_cast<std::ptrdiff_t>(config.num_sequences - config.holdout);
    data::DatasetManifest train{{manifest.sequences.begin(), split}, manifest.info};
    data::DatasetManifest test{{split, manifest.sequences.end()}, manifest.info};
    data::save_manifest(out_dir / "train.txt", train);
    data::save_manifest(out_dir / "test.txt", test);
  }
  return manifest;
}

std::vector<data::Side> load_labels(const std::filesystem::path& path) {
  std::vector<data::Side> out;
  std::size_t line = 0;
  for (char c : read_symbols(path)) {
    ++line;
    if (c == 'L') out.push_back(Side::Left);
    else if (c == 'R') out.push_back(Side::Right);
    else throw ParseError(path.string(), line, "expected L or R");
  }
  return out;
}

std::vector<bool> load_crossing(const std::filesystem::path& path) {
  std::vector<bool> out;
  std::size_t line = 0;
  for (char c : read_symbols(path)) {
    ++line;
    if (c != '0' && c != '1') throw ParseError(path.string(), line, "expected 0 or 1");
    out.push_back(c == '1');
  }
  return out;
}

}  // namespace hoigaze::synth
