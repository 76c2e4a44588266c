#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "hoigaze/data/frame.hpp"

namespace hoigaze::synth {

struct SynthConfig {
  std::uint64_t seed = 7;
  std::size_t num_sequences = 10;
  std::size_t frames_per_sequence = 600;
  std::size_t joints = 20;  // N
  std::size_t objects = 4;  // J
  data::HandMode hand_mode = data::HandMode::Dynamic;
  double coordination = 0.95;         // 1 = gaze locked on the attended hand
  double gaze_noise_deg = 2.0;        // per-axis standard deviation
  double head_follow = 0.02;          // per-frame slerp rate of head_dir toward gaze
  double switch_period_frames = 60.0; // mean frames between attended-hand switches
  double head_speed = 0.3;            // m/s cap on head translation
  double smoothing = 0.9;             // EMA coefficient of the random walks
  std::size_t holdout = 0;            // trailing sequences written to test.txt
};

/// Throws ConfigError on out-of-range fields.
void validate(const SynthConfig& config);

struct GeneratedSequence {
  data::Sequence sequence;
  std::vector<data::Side> scripted;  // attended hand per frame
  std::vector<bool> crossing;        // both hands within 2 degrees of the gaze
};

/// Fully determined by (config.seed, index).
GeneratedSequence generate_sequence(const SynthConfig& config, std::size_t index);

/// Writes seq_XXX.seq, matching .labels (one L/R per line) and .crossing
/// (one 0/1 per line) sidecars, and manifest.txt. With a holdout, also
/// train.txt and test.txt.
data::DatasetManifest generate_dataset(const SynthConfig& config, const std::filesystem::path& out_dir);

/// Sidecar readers.
std::vector<data::Side> load_labels(const std::filesystem::path& path);
std::vector<bool> load_crossing(const std::filesystem::path& path);

inline constexpr double kCrossingDeg = 2.0;
inline constexpr double kEyeOffset = 0.07;

}  // namespace hoigaze::synth
