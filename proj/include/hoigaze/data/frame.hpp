#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "hoigaze/data/geometry.hpp"

namespace hoigaze::data {

enum class HandMode { Dynamic, Static };
enum class Side { Left = 0, Right = 1 };

const char* to_string(HandMode mode);
HandMode parse_hand_mode(const std::string& text);
char side_letter(Side side);
Side other(Side side);

/// One synchronised sample at 30 Hz. Positions in metres, directions unit.
struct Frame {
  Vec3 head_pos{};
  Vec3 head_dir{};
  Vec3 eye_pos{};
  Vec3 gaze_dir{};
  Vec3 left_wrist{};
  Vec3 right_wrist{};
  std::vector<Vec3> left_hand;   // N joints
  std::vector<Vec3> right_hand;  // N joints
  std::vector<Vec3> objects;     // J object centres

  const std::vector<Vec3>& hand(Side side) const { return side == Side::Left ? left_hand : right_hand; }
};

struct SequenceInfo {
  std::size_t joints = 0;   // N
  std::size_t objects = 0;  // J
  int fps = 30;
  HandMode hand_mode = HandMode::Dynamic;
};

struct Sequence {
  std::string id;
  SequenceInfo info;
  std::vector<Frame> frames;
};

/// T consecutive frames cut from one sequence.
struct FrameWindow {
  std::vector<Frame> frames;
  std::string sequence_id;
  std::size_t start = 0;

  std::size_t length() const { return frames.size(); }
  std::size_t joints() const { return frames.empty() ? 0 : frames.front().left_hand.size(); }
  std::size_t object_count() const { return frames.empty() ? 0 : frames.front().objects.size(); }
};

struct AttendedLabel {
  std::vector<Side> per_frame;
  Side window = Side::Right;
};

struct DatasetManifest {
  std::vector<std::filesystem::path> sequences;
  SequenceInfo info;
};

inline constexpr std::size_t kDefaultWindow = 15;
inline constexpr std::size_t kTrainStride = 1;
inline constexpr std::size_t kEvalStride = 15;

}  // namespace hoigaze::data
